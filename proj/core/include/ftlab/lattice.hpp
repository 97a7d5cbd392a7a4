#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "ftlab/common.hpp"

namespace ftlab {

// Uniform periodic lattice on [-L, L)^d. Nodes x_j = -L + j h, h = 2L/N; the
// dual lattice holds xi_k = k/(2L), k in [-N/2, N/2), stored in centered order.
// Multi-indices are flattened row-major with axis 0 slowest.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int points, double half_width);

  int dim() const { return dim_; }
  int points() const { return n_; }
  double half_width() const { return l_; }
  double spacing() const { return 2.0 * l_ / n_; }
  double freq_spacing() const { return 0.5 / l_; }
  double cell() const { return std::pow(spacing(), dim_); }
  double freq_cell() const { return std::pow(freq_spacing(), dim_); }
  Index size() const { return dim_ == 1 ? Index(n_) : Index(n_) * n_; }

  double node(int j) const { return -l_ + j * spacing(); }
  double frequency(int m) const { return (m - n_ / 2) * freq_spacing(); }
  std::array<int, 2> unravel(Index flat) const;
  Eigen::VectorXd point(Index flat) const;
  Eigen::VectorXd frequency_point(Index flat) const;

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_ && l_ == o.l_; }

 private:
  int dim_ = 1;
  int n_ = 16;
  double l_ = 1.0;
};

// Throws std::invalid_argument unless d in {1,2}, N even and >= 16, L > 0.
Grid make_grid(int dim, int points, double half_width);

struct WaveFunction {
  Grid grid;
  Eigen::VectorXcd values;
};

struct Spectrum {
  Grid grid;
  Eigen::VectorXcd values;
};

// Builds a WaveFunction after checking the length and that all entries are finite.
WaveFunction make_wavefunction(const Grid& grid, Eigen::VectorXcd values);
WaveFunction sample(const Grid& grid, const std::function<cplx(const Eigen::VectorXd&)>& fn);

// Riemann-sum Fourier transform F f(xi_k) = h^d sum_j e^{-2 pi i x_j xi_k} f(x_j).
Spectrum dft(const WaveFunction& f);
// Inverse with weight (1/2L)^d; exact inverse of dft.
WaveFunction inverse_dft(const Spectrum& s);
// Applies a Fourier multiplier m(xi) given on the centered frequency lattice.
Eigen::VectorXcd apply_multiplier(const Grid& grid, const Eigen::VectorXcd& values,
                                  const Eigen::VectorXcd& multiplier);

cplx inner(const WaveFunction& f, const WaveFunction& g);  // h^d sum f conj(g)
double l2_norm(const WaveFunction& f);

// Mass in the outer shell |x_i| >= 0.9 L (any axis), relative to the total mass.
double boundary_mass(const WaveFunction& f);
inline constexpr double kBoundaryMassLimit = 1e-8;

// Band-limited shift by +h/2 (d = 1). The Nyquist mode is dropped so the shift
// maps real samples to real samples; half_shift_adjoint shifts by -h/2.
Eigen::VectorXcd half_shift(const Grid& grid, const Eigen::VectorXcd& values);
Eigen::VectorXcd half_shift_adjoint(const Grid& grid, const Eigen::VectorXcd& values);

// L2-normalized Gaussian 2^{d/4} w^{-d/2} exp(-pi |x-c|^2/w^2) e^{2 pi i xi0.x}.
WaveFunction gaussian(const Grid& grid, double width, const Eigen::VectorXd& center,
                      const Eigen::VectorXd& frequency);
WaveFunction standard_gaussian(const Grid& grid);

// Smooth per-axis bump: 1 on |x_i| <= a L, 0 for |x_i| >= b L.
struct CompactWindow {
  double inner_fraction = 0.5;
  double outer_fraction = 0.8;

  double operator()(const Grid& grid, const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(const Grid& grid) const;
  // Nodes strictly inside the flat part, used for sup errors on the compact set.
  bool in_core(const Grid& grid, const Eigen::VectorXd& x) const;
};

}  // namespace ftlab
