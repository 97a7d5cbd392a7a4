#include "ftlab/potential.hpp"

#include <cmath>

#include "json.hpp"

namespace ftlab {

std::string to_string(Potential::Kind k) {
  switch (k) {
    case Potential::Kind::zero: return "zero";
    case Potential::Kind::cosine: return "cosine";
    case Potential::Kind::gaussian_bump: return "gaussian";
    case Potential::Kind::fourier_measure: return "fourier";
    case Potential::Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

Potential Potential::zero(int dim) {
  Potential p;
  p.dim_ = dim;
  p.vec_ = Eigen::VectorXd::Zero(dim);
  return p;
}

Potential Potential::cosine(double amplitude, Eigen::VectorXd frequency) {
  if (frequency.size() < 1 || frequency.size() > 2) throw std::invalid_argument("cosine potential: bad dimension");
  if (!std::isfinite(amplitude) || !frequency.allFinite()) throw std::invalid_argument("cosine potential: non-finite");
  Potential p;
  p.kind_ = Kind::cosine;
  p.dim_ = int(frequency.size());
  p.amplitude_ = amplitude;
  p.vec_ = std::move(frequency);
  return p;
}

Potential Potential::gaussian_bump(double amplitude, Eigen::VectorXd center, double width) {
  if (center.size() < 1 || center.size() > 2) throw std::invalid_argument("gaussian potential: bad dimension");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian potential: width must be positive");
  Potential p;
  p.kind_ = Kind::gaussian_bump;
  p.dim_ = int(center.size());
  p.amplitude_ = amplitude;
  p.vec_ = std::move(center);
  p.width_ = width;
  return p;
}

Potential Potential::fourier_measure(std::vector<FourierAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("fourier potential: no atoms");
  Potential p;
  p.kind_ = Kind::fourier_measure;
  p.dim_ = int(atoms.front().frequency.size());
  for (const auto& a : atoms)
    if (a.frequency.size() != p.dim_) throw std::invalid_argument("fourier potential: mixed dimensions");
  // Real iff the measure is conjugation symmetric: w(-nu) = conj(w(nu)).
  p.real_ = true;
  for (const auto& a : atoms) {
    cplx mirrored = 0.0, here = 0.0;
    for (const auto& b : atoms) {
      if ((b.frequency + a.frequency).norm() < 1e-14) mirrored += std::conj(b.weight);
      if ((b.frequency - a.frequency).norm() < 1e-14) here += b.weight;
    }
    if (std::abs(mirrored - here) > 1e-14 * std::max(1.0, std::abs(here))) p.real_ = false;
  }
  p.atoms_ = std::move(atoms);
  return p;
}

Potential Potential::tabulated(const Grid& grid, Eigen::VectorXcd values) {
  if (values.size() != grid.size()) throw GridMismatchError("tabulated potential: length mismatch");
  if (!values.allFinite()) throw std::invalid_argument("tabulated potential: non-finite entries");
  Potential p;
  p.kind_ = Kind::tabulated;
  p.dim_ = grid.dim();
  p.table_grid_ = grid;
  p.real_ = values.imag().cwiseAbs().maxCoeff() == 0.0;
  p.table_ = std::move(values);
  return p;
}

cplx Potential::operator()(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::cosine: return amplitude_ * std::cos(kTwoPi * vec_.dot(x));
    case Kind::gaussian_bump:
      return amplitude_ * std::exp(-kPi * (x - vec_).squaredNorm() / (width_ * width_));
    case Kind::fourier_measure: {
      cplx s = 0.0;
      for (const auto& a : atoms_) s += a.weight * std::exp(cplx(0.0, kTwoPi * a.frequency.dot(x)));
      return real_ ? cplx(s.real(), 0.0) : s;
    }
    case Kind::tabulated: {
      const Grid& g = table_grid_;
      const double h = g.spacing();
      const int n = g.points();
      std::array<int, 2> i0{0, 0};
      std::array<double, 2> fr{0.0, 0.0};
      for (int a = 0; a < dim_; ++a) {
        const double u = (x[a] + g.half_width()) / h;
        if (u < 0.0 || u > n - 1) return 0.0;
        i0[a] = std::min(int(std::floor(u)), n - 2);
        fr[a] = u - i0[a];
      }
      if (dim_ == 1) return (1.0 - fr[0]) * table_[i0[0]] + fr[0] * table_[i0[0] + 1];
      auto at = [&](int i, int j) { return table_[Index(i) * n + j]; };
      return (1 - fr[0]) * (1 - fr[1]) * at(i0[0], i0[1]) + fr[0] * (1 - fr[1]) * at(i0[0] + 1, i0[1]) +
             (1 - fr[0]) * fr[1] * at(i0[0], i0[1] + 1) + fr[0] * fr[1] * at(i0[0] + 1, i0[1] + 1);
    }
  }
  return 0.0;
}

Eigen::VectorXcd Potential::sample(const Grid& grid) const {
  if (kind_ != Kind::zero && grid.dim() != dim_) throw GridMismatchError("potential dimension does not match grid");
  Eigen::VectorXcd v(grid.size());
  if (kind_ == Kind::tabulated && grid == table_grid_) return table_;
  for (Index i = 0; i < grid.size(); ++i) v[i] = (*this)(grid.point(i));
  return v;
}

double Potential::sup_bound() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::cosine:
    case Kind::gaussian_bump: return std::abs(amplitude_);
    case Kind::fourier_measure: {
      double s = 0.0;
      for (const auto& a : atoms_) s += std::abs(a.weight);
      return s;
    }
    case Kind::tabulated: return table_.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

double Potential::imag_sup_bound() const {
  if (real_) return 0.0;
  if (kind_ == Kind::tabulated) return table_.imag().cwiseAbs().maxCoeff();
  return sup_bound();
}

std::string Potential::descriptor() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["dim"] = dim_;
  j["real"] = real_;
  j["sup_bound"] = sup_bound();
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  switch (kind_) {
    case Kind::zero: break;
    case Kind::cosine:
      j["amplitude"] = amplitude_;
      j["frequency"] = vec(vec_);
      break;
    case Kind::gaussian_bump:
      j["amplitude"] = amplitude_;
      j["center"] = vec(vec_);
      j["width"] = width_;
      break;
    case Kind::fourier_measure: {
      auto arr = nlohmann::json::array();
      for (const auto& a : atoms_)
        arr.push_back({{"weight", {a.weight.real(), a.weight.imag()}}, {"frequency", vec(a.frequency)}});
      j["atoms"] = arr;
      break;
    }
    case Kind::tabulated:
      j["grid"] = {{"d", table_grid_.dim()}, {"N", table_grid_.points()}, {"L", table_grid_.half_width()}};
      break;
  }
  return j.dump();
}

}  // namespace ftlab
