#pragma once

#include <string>
#include <vector>

#include "ftlab/potential.hpp"

namespace ftlab {

// a(x, xi) = 1/2 x.Ax + xi.Bx + 1/2 xi.C xi, plus an optional bounded potential.
struct QuadraticHamiltonian {
  int dim = 1;
  Eigen::MatrixXd A, B, C;
  Potential potential;

  // Throws std::invalid_argument on shape mismatch, non-finite or asymmetric A, C.
  void validate() const;
  bool kinetic_only() const;  // A = 0 and B = 0
  bool is_zero() const;       // every block vanishes
  std::string blocks_json() const;
};

QuadraticHamiltonian free_particle(int dim = 1);
QuadraticHamiltonian harmonic_oscillator(int dim = 1);
// d = 2, A = diag(2 pi, 8 pi), C = 2 pi I: frequencies 1 and 2 per 2 pi of flow time.
QuadraticHamiltonian anisotropic_oscillator();

// [[B, C], [-A, -B^T]]
Eigen::MatrixXd hamilton_matrix(const QuadraticHamiltonian& h);

// Pade(13) scaling-and-squaring exponential.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

struct SymplecticFlow {
  double t = 0.0;
  int dim = 1;
  Eigen::MatrixXd matrix;  // exp((t / 2 pi) H)

  Eigen::MatrixXd A() const { return matrix.topLeftCorner(dim, dim); }
  Eigen::MatrixXd B() const { return matrix.topRightCorner(dim, dim); }
  Eigen::MatrixXd C() const { return matrix.bottomLeftCorner(dim, dim); }
  Eigen::MatrixXd D() const { return matrix.bottomRightCorner(dim, dim); }
  double det_b() const { return B().determinant(); }
  // Scale used to judge det B_t relative to the size of the flow: max(1, |A_t|_max)^d.
  double det_scale() const;
  bool near_exceptional() const;
};

SymplecticFlow flow_at(const QuadraticHamiltonian& h, double t);
// |M^T J M - J|_max.
double symplectic_residual(const Eigen::MatrixXd& m);

inline constexpr double kNearExceptionalRatio = 1e-6;

struct ExceptionalRoot {
  double t;
  enum class Kind { sign_change, tangential } kind;
};

struct ExceptionalTimeSet {
  bool whole_line = false;
  std::vector<ExceptionalRoot> roots;
  std::vector<std::pair<double, double>> unresolved;  // bracketing intervals of suspected clusters
  double scale = 0.0;

  std::vector<double> times() const;
  bool resolved() const { return unresolved.empty(); }
};

// Scan det B_t on [t_min, t_max] with the given step, bisect sign changes to
// < 1e-12 and golden-section search local minima of |det B_t| for tangential zeros.
ExceptionalTimeSet exceptional_times(const QuadraticHamiltonian& h, double t_min, double t_max,
                                     double step);

}  // namespace ftlab
