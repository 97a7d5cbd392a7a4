#include "ftlab/symplectic.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace ftlab {

void QuadraticHamiltonian::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("hamiltonian dimension must be 1 or 2");
  for (const Eigen::MatrixXd* m : {&A, &B, &C}) {
    if (m->rows() != dim || m->cols() != dim) throw std::invalid_argument("hamiltonian block has wrong shape");
    if (!m->allFinite()) throw std::invalid_argument("hamiltonian block has non-finite entries");
  }
  auto sym = [](const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  };
  if (!sym(A)) throw std::invalid_argument("hamiltonian block A must be symmetric");
  if (!sym(C)) throw std::invalid_argument("hamiltonian block C must be symmetric");
  if (!potential.is_zero() && potential.dim() != dim)
    throw std::invalid_argument("potential dimension does not match hamiltonian");
}

bool QuadraticHamiltonian::kinetic_only() const { return A.isZero(0.0) && B.isZero(0.0); }

bool QuadraticHamiltonian::is_zero() const { return kinetic_only() && C.isZero(0.0); }

std::string QuadraticHamiltonian::blocks_json() const {
  auto mat = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      auto r = nlohmann::json::array();
      for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  return nlohmann::json{{"A", mat(A)}, {"B", mat(B)}, {"C", mat(C)}}.dump();
}

QuadraticHamiltonian free_particle(int dim) {
  QuadraticHamiltonian h;
  h.dim = dim;
  h.A = Eigen::MatrixXd::Zero(dim, dim);
  h.B = Eigen::MatrixXd::Zero(dim, dim);
  h.C = 4.0 * kPi * kPi * Eigen::MatrixXd::Identity(dim, dim);
  h.potential = Potential::zero(dim);
  h.validate();
  return h;
}

QuadraticHamiltonian harmonic_oscillator(int dim) {
  QuadraticHamiltonian h;
  h.dim = dim;
  h.A = kTwoPi * Eigen::MatrixXd::Identity(dim, dim);
  h.B = Eigen::MatrixXd::Zero(dim, dim);
  h.C = kTwoPi * Eigen::MatrixXd::Identity(dim, dim);
  h.potential = Potential::zero(dim);
  h.validate();
  return h;
}

QuadraticHamiltonian anisotropic_oscillator() {
  QuadraticHamiltonian h;
  h.dim = 2;
  h.A = Eigen::Vector2d(kTwoPi, 4.0 * kTwoPi).asDiagonal();
  h.B = Eigen::MatrixXd::Zero(2, 2);
  h.C = kTwoPi * Eigen::MatrixXd::Identity(2, 2);
  h.potential = Potential::zero(2);
  h.validate();
  return h;
}

Eigen::MatrixXd hamilton_matrix(const QuadraticHamiltonian& h) {
  h.validate();
  const int d = h.dim;
  Eigen::MatrixXd m(2 * d, 2 * d);
  m.topLeftCorner(d, d) = h.B;
  m.topRightCorner(d, d) = h.C;
  m.bottomLeftCorner(d, d) = -h.A;
  m.bottomRightCorner(d, d) = -h.B.transpose();
  return m;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!m.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Index n = m.rows();
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, int(std::ceil(std::log2(norm1 / theta13))));
  const Eigen::MatrixXd a = m / std::ldexp(1.0, s);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
  const Eigen::MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Eigen::MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

double SymplecticFlow::det_scale() const {
  return std::pow(std::max(1.0, matrix.cwiseAbs().maxCoeff()), dim);
}

bool SymplecticFlow::near_exceptional() const {
  return std::abs(det_b()) < kNearExceptionalRatio * det_scale();
}

SymplecticFlow flow_at(const QuadraticHamiltonian& h, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("flow_at: non-finite time");
  return SymplecticFlow{t, h.dim, expm((t / kTwoPi) * hamilton_matrix(h))};
}

double symplectic_residual(const Eigen::MatrixXd& m) {
  const Index d = m.rows() / 2;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  j.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  j.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

std::vector<double> ExceptionalTimeSet::times() const {
  std::vector<double> out;
  for (const auto& r : roots) out.push_back(r.t);
  return out;
}

ExceptionalTimeSet exceptional_times(const QuadraticHamiltonian& h, double t_min, double t_max, double step) {
  if (!(t_max > t_min)) throw std::invalid_argument("exceptional_times: empty interval");
  if (!(step > 0.0) || step > (t_max - t_min) / 100.0)
    throw std::invalid_argument("exceptional_times: scan step must be at most (t_max - t_min) / 100");

  const Eigen::MatrixXd ham = hamilton_matrix(h);
  auto det = [&](double t) { return flow_at(h, t).det_b(); };

  ExceptionalTimeSet out;
  const long count = long(std::floor((t_max - t_min) / step + 1e-9)) + 1;
  std::vector<double> ts, ds;
  ts.reserve(std::size_t(count) + 1);
  for (long i = 0; i < count; ++i) ts.push_back(t_min + double(i) * step);
  if (t_max - ts.back() > 1e-12 * step) ts.push_back(t_max);
  double max_abs = 0.0;
  for (double t : ts) {
    const SymplecticFlow f = flow_at(h, t);
    ds.push_back(f.det_b());
    max_abs = std::max(max_abs, std::abs(ds.back()));
    out.scale = std::max(out.scale, f.det_scale());
  }
  if (ham.isZero(0.0) || max_abs < 1e-14) {
    out.whole_line = true;
    return out;
  }

  const double zero_tol = 1e-10 * out.scale;
  const double noise = 1e-13 * out.scale;
  std::vector<ExceptionalRoot> found;
  const std::size_t m = ts.size();

  auto sgn = [&](double v) { return std::abs(v) <= noise ? 0 : (v > 0 ? 1 : -1); };

  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (sgn(ds[i]) * sgn(ds[i + 1]) < 0) {
      double a = ts[i], b = ts[i + 1], fa = ds[i];
      while (b - a > 1e-13) {
        const double c = 0.5 * (a + b);
        const double fc = det(c);
        if (fc == 0.0) { a = b = c; break; }
        if ((fc > 0) == (fa > 0)) { a = c; fa = fc; } else { b = c; }
      }
      found.push_back({0.5 * (a + b), ExceptionalRoot::Kind::sign_change});
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    const double ai = std::abs(ds[i]);
    const bool left_ok = i == 0 || ai <= std::abs(ds[i - 1]);
    const bool right_ok = i + 1 == m || ai <= std::abs(ds[i + 1]);
    if (!left_ok || !right_ok) continue;
    const int s_left = i > 0 ? sgn(ds[i - 1]) : 0;
    const int s_right = i + 1 < m ? sgn(ds[i + 1]) : 0;
    if (ai <= noise) {
      const bool crosses = s_left * s_right < 0;
      found.push_back({ts[i], crosses ? ExceptionalRoot::Kind::sign_change : ExceptionalRoot::Kind::tangential});
      continue;
    }
    if (i == 0 || i + 1 == m) continue;
    if (s_left * sgn(ds[i]) < 0 || s_right * sgn(ds[i]) < 0) continue;  // handled by bisection
    // Golden-section search for the minimum of |det| on [t_{i-1}, t_{i+1}].
    const int base_sign = sgn(ds[i]);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = ts[i - 1], b = ts[i + 1];
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = det(c), fd = det(d);
    bool flipped = false;
    auto check = [&](double v) {
      if (std::abs(v) > zero_tol && sgn(v) * base_sign < 0) flipped = true;
    };
    check(fc);
    check(fd);
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
      if (std::abs(fc) < std::abs(fd)) {
        b = d; d = c; fd = fc;
        c = b - g * (b - a); fc = det(c); check(fc);
      } else {
        a = c; c = d; fc = fd;
        d = a + g * (b - a); fd = det(d); check(fd);
      }
    }
    const double tm = 0.5 * (a + b);
    const double fm = std::abs(det(tm));
    if (flipped) {
      out.unresolved.emplace_back(ts[i - 1], ts[i + 1]);
    } else if (fm < zero_tol) {
      found.push_back({tm, ExceptionalRoot::Kind::tangential});
    } else if (fm < 1e2 * zero_tol) {
      out.unresolved.emplace_back(ts[i - 1], ts[i + 1]);
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.t < y.t; });
  for (const auto& r : found) {
    if (!out.roots.empty() && std::abs(r.t - out.roots.back().t) < 1e-9) continue;
    out.roots.push_back(r);
  }
  return out;
}

}  // namespace ftlab
