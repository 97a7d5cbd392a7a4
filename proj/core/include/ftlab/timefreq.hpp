#pragma once

#include <limits>
#include <vector>

#include "ftlab/propagators.hpp"

namespace ftlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// L2-normalized Gaussian window of width w sampled on the grid (centered at 0).
struct Window {
  double width = 1.0;
  WaveFunction sampled;
};
Window gaussian_window(const Grid& grid, double width = 1.0);

// Sub-lattice of the STFT: positions every `stride` nodes, frequencies from a
// centered patch of `patch` nodes (0 = full grid, periodized window).
struct StftLattice {
  int stride = 1;
  int patch = 0;
};

struct STFTGram {
  Grid grid;
  int stride = 1;
  int patch = 0;
  Eigen::MatrixXcd values;  // rows: positions, cols: centered frequencies (row-major multi-index)

  int positions_per_axis() const { return grid.points() / stride; }
  double alpha() const { return stride * grid.spacing(); }
  double beta() const { return 1.0 / (patch * grid.spacing()); }
  double cell() const { return std::pow(alpha() * beta(), grid.dim()); }
  Eigen::VectorXd position(Index row) const;
  Eigen::VectorXd frequency(Index col) const;
};

// V_g f(x, xi) = int e^{-2 pi i y xi} f(y) conj(g(y - x)) dy on the lattice.
STFTGram stft(const WaveFunction& f, const Window& g, StftLattice lattice = {});
// Discrete L2 pairing alpha^d beta^d sum a conj(b) of two grams on the same lattice.
cplx gram_pairing(const STFTGram& a, const STFTGram& b);

// Kernel on grid x grid viewed as a function of 2d variables (d = 1 only).
WaveFunction kernel_as_function(const SampledKernel& k);

// Cross-Wigner W(f, g)(x_m, xi_k), d = 1. Half-node samples use the band-limited half shift.
Eigen::MatrixXcd wigner(const WaveFunction& f, const WaveFunction& g);
// Weyl quantization through the dual pairing <sigma^w f, e_j> = <sigma, W(e_j, f)>;
// sigma(x_m, xi_k) is given on the same lattice as wigner (rows x, cols xi).
WaveFunction weyl_apply(const Eigen::MatrixXcd& sigma, const WaveFunction& f);

enum class NormFlavor { modulation, fourier_lebesgue, localized_fourier_lebesgue };
std::string to_string(NormFlavor f);

struct NormSpec {
  NormFlavor flavor = NormFlavor::modulation;
  double p = 1.0;
  double q = 1.0;
  double s = 0.0;
  StftLattice lattice{};
  CompactWindow window{};
};
inline constexpr double kMaxWeight = 50.0;

// M^{p,q}_s: (int (int |V_g f|^p dx)^{q/p} <xi>^{qs} dxi)^{1/q};
// FL^1_s: int |F f| <xi>^s dxi, optionally after multiplying by the compact window.
double mod_norm(const WaveFunction& f, const NormSpec& spec, const Window& g);

// Time-frequency shifted window pi(z) g (x) = e^{2 pi i xi.x} g(x - x0), evaluated exactly.
Eigen::VectorXcd tf_shift(const Grid& grid, double width, const Eigen::VectorXd& x0, const Eigen::VectorXd& xi);

// pi(z1) g (x) pi(z2) g (y), a test function on kernel space.
struct KernelAtom {
  Eigen::VectorXd x0, xi0, y0, eta0;
  double width = 1.0;
};

// Direct pairing <K, phi> = h^{2d} sum K(x, y) conj(phi(x, y)).
cplx weakstar_pairing(const SampledKernel& k, const KernelAtom& atom);
// Same pairing computed as the L2 pairing of the two STFTs (d = 1), restricted to
// window positions within `radius` of the atom center.
cplx weakstar_pairing_stft(const SampledKernel& k, const KernelAtom& atom, double radius = 6.0);
// <c' delta(s x - y), phi> = c' int conj(phi(x, s x)) dx by composite Gauss-Legendre quadrature.
cplx weakstar_pairing(const ReflectionDescriptor& r, const KernelAtom& atom, const Grid& grid);

struct GramOptions {
  double spacing = 0.5;  // phase-space lattice step
  int extent = 8;        // z = (a, b) spacing with |a|, |b| <= extent
};

struct DecayReport {
  std::vector<double> radius;
  std::vector<double> envelope;  // max |<sigma^w pi(z) g, pi(w) g>| over |z - w| = radius
  double fitted_c = 0.0;
  double fitted_s = 0.0;
  double domination_ratio = 0.0;  // sum_w G(0, w) / sum_w C <w>^{-s}
  Eigen::MatrixXd gram;
};

// Almost-diagonalization of sigma^w by Gabor atoms on a phase-space sub-lattice (d = 1).
// Throws ResolutionError when the outer atoms do not fit the grid box or band.
DecayReport almost_diag_gram(const Eigen::MatrixXcd& sigma, const Grid& grid, const Window& g,
                             GramOptions opts = {});

}  // namespace ftlab
