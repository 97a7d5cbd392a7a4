#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ftlab {

using cplx = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Exit-code aware error hierarchy. The CLI maps each kind to a status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

// t lies in (or numerically near) the exceptional set; carries the offending determinant.
class ExceptionalTimeError : public Error {
 public:
  ExceptionalTimeError(const std::string& what, double t, double det)
      : Error(what), t_(t), det_(det) {}
  double time() const { return t_; }
  double determinant() const { return det_; }

 private:
  double t_;
  double det_;
};

class UnresolvedError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class NonUnitaryError : public Error {
 public:
  using Error::Error;
};

// Global worker count used by parallel_for. Results never depend on it:
// work is split into fixed index chunks and every chunk writes disjoint output.
void set_thread_count(int k);
int thread_count();

void parallel_for(Index n, const std::function<void(Index begin, Index end)>& body);

// Pairwise summation; the reduction tree depends only on the length.
double pairwise_sum(std::span<const double> v);
cplx pairwise_sum(std::span<const cplx> v);

// Japanese bracket (1 + |v|^2)^{1/2}.
inline double bracket(double norm2) { return std::sqrt(1.0 + norm2); }

}  // namespace ftlab
