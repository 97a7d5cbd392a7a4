#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "ftlab/symplectic.hpp"

namespace ftlab {

enum class KernelProvenance { metaplectic, mehler, eigensolver, trotter, quadrature };
std::string to_string(KernelProvenance p);

// Kernel values K(x_j, y_k) on grid x grid. The grid operator is h^d K, so
// (U f)(x_j) ~ h^d sum_k K(x_j, y_k) f(y_k).
struct SampledKernel {
  Grid grid;
  Eigen::MatrixXcd values;
  double t = 0.0;
  int steps = 0;
  KernelProvenance provenance = KernelProvenance::eigensolver;
  cplx phase{1.0, 0.0};          // calibrated constant (c_t, c(k)); 1 when not applicable
  double phase_deviation = 0.0;  // | |<U_ref g, K g>| - 1 | at calibration
  bool unitary = true;

  Eigen::MatrixXcd as_operator() const { return grid.cell() * values; }
};

// Kernel at an exceptional time of the harmonic flow: c' delta(s x - y), s = (-1)^k.
struct ReflectionDescriptor {
  double t = 0.0;
  int k = 0;
  int parity = 1;
  cplx c_prime{1.0, 0.0};
  double deviation = 0.0;
};

// Grid realization of the Weyl quantization of a: 1/2 C multiplier through the DFT,
// 1/2 x.Ax on the diagonal, B through the symmetrized products 1/2 (P_i X_j + X_j P_i).
Eigen::MatrixXcd grid_hamiltonian(const QuadraticHamiltonian& h, const Grid& grid, bool include_potential = true);

// exp(-i t H_grid) through a cached eigendecomposition (Hermitian H) or a dense
// matrix exponential (complex potential, flagged non-unitary).
class SpectralPropagator {
 public:
  SpectralPropagator(const QuadraticHamiltonian& h, const Grid& grid, bool include_potential = true);

  const Grid& grid() const { return grid_; }
  bool hermitian() const { return hermitian_; }
  // Forces the lazy eigendecomposition; call before sharing across threads.
  void prepare() const;
  Eigen::MatrixXcd operator_at(double t) const;
  Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& v) const;
  SampledKernel kernel(double t) const;

  // Eigen-data is computed lazily; the multiplier fast path never needs it.
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXcd& eigenvectors() const;
  // Fraction of ground-state mass in the outer quarter of the frequency band.
  double ground_state_band_mass() const;

 private:
  void decompose() const;

  Grid grid_;
  bool multiplier_path_ = false;
  bool hermitian_ = true;
  Eigen::VectorXd symbol_;  // kinetic multiplier 1/2 xi.C xi (fast path)
  Eigen::MatrixXcd h_;
  mutable bool decomposed_ = false;
  mutable Eigen::VectorXd evals_;
  mutable Eigen::MatrixXcd evecs_;
};

inline constexpr double kBandMassLimit = 1e-8;

SampledKernel eigensolver_reference(const QuadraticHamiltonian& h, double t, const Grid& grid);

struct PhaseCalibration {
  cplx phase{1.0, 0.0};
  double deviation = 0.0;
};
// c = z / |z| with z = <reference image, candidate image>.
PhaseCalibration calibrate_phase(const WaveFunction& reference_image, const WaveFunction& candidate_image);

struct MetaplecticKernelSpec {
  SymplecticFlow flow;
  Eigen::MatrixXd db_inv;  // D_t B_t^{-1}
  Eigen::MatrixXd b_inv;
  Eigen::MatrixXd b_inv_a;  // B_t^{-1} A_t
  double amplitude = 1.0;   // |det B_t|^{-1/2}
};

// Throws ExceptionalTimeError when det B_t is numerically degenerate.
MetaplecticKernelSpec metaplectic_spec(const QuadraticHamiltonian& h, double t);
double phase_phi(const MetaplecticKernelSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
// Sampled c_t |det B_t|^{-1/2} e^{2 pi i Phi_t}; c_t is calibrated against the grid
// propagator of the quadratic part (built on demand unless supplied).
SampledKernel metaplectic_kernel(const QuadraticHamiltonian& h, double t, const Grid& grid,
                                 const SpectralPropagator* reference = nullptr);

using MehlerResult = std::variant<SampledKernel, ReflectionDescriptor>;
// Harmonic-oscillator kernel; at t = k pi returns the reflection descriptor.
MehlerResult mehler_kernel(double t, const Grid& grid, const SpectralPropagator* reference = nullptr);
// Exact value of the constant c(k) = e^{-i pi (2k+1)/4} (per dimension).
cplx mehler_constant(int k);

enum class FreeStep { spectral, sampled_metaplectic };
// start: (e^{-i tau H0} e^{-i tau V})^n, V sampled at x_0..x_{n-1}.
// end:   (e^{-i tau V} e^{-i tau H0})^n, V sampled at x_1..x_n.
enum class Placement { start, end };

struct TrotterOptions {
  FreeStep free_step = FreeStep::spectral;
  Placement placement = Placement::start;
  int max_step_increment = 10;  // sampled route: how far n may be raised to leave the exceptional set
};

std::string to_string(FreeStep f);
std::string to_string(Placement p);

class TrotterPropagator {
 public:
  TrotterPropagator(QuadraticHamiltonian h, Grid grid, TrotterOptions opts = {});

  const Grid& grid() const { return grid_; }
  const QuadraticHamiltonian& hamiltonian() const { return h_; }
  const TrotterOptions& options() const { return opts_; }
  const SpectralPropagator& free_propagator() const { return *free_; }

  // Number of steps actually used for (t, n).
  int resolve_steps(double t, int n) const;
  Eigen::MatrixXcd free_step(double tau) const;
  Eigen::MatrixXcd operator_at(double t, int n) const;
  Eigen::VectorXcd apply(double t, int n, const Eigen::VectorXcd& v) const;
  SampledKernel kernel(double t, int n) const;

 private:
  QuadraticHamiltonian h_;
  Grid grid_;
  TrotterOptions opts_;
  std::shared_ptr<SpectralPropagator> free_;
  Eigen::VectorXcd potential_;
};

SampledKernel trotter_propagator(const QuadraticHamiltonian& h, double t, int n, const Grid& grid,
                                 TrotterOptions opts = {});

// Discrete action sum_k tau [ 1/2 (dx_k/tau).M (dx_k/tau) - V(x_k) ] with M = 4 pi^2 C^{-1};
// vertices x_0 = y, ..., x_n = x. Placement::end samples V at x_1..x_n, start at x_0..x_{n-1}.
double action_sum(const QuadraticHamiltonian& h, double t, const std::vector<Eigen::VectorXd>& vertices,
                  Placement placement = Placement::end);

// Time-slice integral for a kinetic-only Hamiltonian, d = 1, n <= 3, evaluated by
// Gauss-Legendre panels on [-L, L] at eight nodes per grid cell.
cplx timeslice_kernel_quadrature(const QuadraticHamiltonian& h, double t, int n, const Grid& grid, double x,
                                 double y, Placement placement = Placement::start);

// max |U^* U - I|.
double unitarity_defect(const Eigen::MatrixXcd& op);

}  // namespace ftlab
