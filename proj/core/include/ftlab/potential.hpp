#pragma once

#include <string>
#include <vector>

#include "ftlab/lattice.hpp"

namespace ftlab {

struct FourierAtom {
  cplx weight;
  Eigen::VectorXd frequency;
};

// Bounded perturbation V. Kinds:
//   zero
//   cosine          a cos(2 pi nu.x)
//   gaussian_bump   a exp(-pi |x-c|^2 / w^2)
//   fourier_measure sum_j w_j e^{2 pi i nu_j.x}  (finite measure mu = sum w_j delta_{nu_j})
//   tabulated       samples on a grid, multilinear interpolation, zero outside
class Potential {
 public:
  enum class Kind { zero, cosine, gaussian_bump, fourier_measure, tabulated };

  Potential() = default;
  static Potential zero(int dim = 1);
  static Potential cosine(double amplitude, Eigen::VectorXd frequency);
  static Potential gaussian_bump(double amplitude, Eigen::VectorXd center, double width);
  static Potential fourier_measure(std::vector<FourierAtom> atoms);
  static Potential tabulated(const Grid& grid, Eigen::VectorXcd values);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  cplx operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXcd sample(const Grid& grid) const;

  // Upper bound for sup |V| (exact for cosine and bump, total variation for measures).
  double sup_bound() const;
  double imag_sup_bound() const;
  bool is_real() const { return real_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  // JSON descriptor used by sidecars and reports.
  std::string descriptor() const;

  double amplitude() const { return amplitude_; }
  const Eigen::VectorXd& frequency() const { return vec_; }
  const Eigen::VectorXd& center() const { return vec_; }
  double width() const { return width_; }
  const std::vector<FourierAtom>& atoms() const { return atoms_; }

 private:
  Kind kind_ = Kind::zero;
  int dim_ = 1;
  bool real_ = true;
  double amplitude_ = 0.0;
  double width_ = 1.0;
  Eigen::VectorXd vec_;
  std::vector<FourierAtom> atoms_;
  Grid table_grid_;
  Eigen::VectorXcd table_;
};

std::string to_string(Potential::Kind k);

}  // namespace ftlab
