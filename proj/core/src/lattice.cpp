#include "ftlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fft.hpp"

namespace ftlab {

Grid::Grid(int dim, int points, double half_width) : dim_(dim), n_(points), l_(half_width) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (points < 16 || points % 2 != 0) throw std::invalid_argument("grid points must be even and >= 16");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("grid half-width must be positive");
}

Grid make_grid(int dim, int points, double half_width) { return Grid(dim, points, half_width); }

std::array<int, 2> Grid::unravel(Index flat) const {
  if (dim_ == 1) return {int(flat), 0};
  return {int(flat / n_), int(flat % n_)};
}

Eigen::VectorXd Grid::point(Index flat) const {
  Eigen::VectorXd x(dim_);
  auto idx = unravel(flat);
  for (int a = 0; a < dim_; ++a) x[a] = node(idx[a]);
  return x;
}

Eigen::VectorXd Grid::frequency_point(Index flat) const {
  Eigen::VectorXd xi(dim_);
  auto idx = unravel(flat);
  for (int a = 0; a < dim_; ++a) xi[a] = frequency(idx[a]);
  return xi;
}

WaveFunction make_wavefunction(const Grid& grid, Eigen::VectorXcd values) {
  if (values.size() != grid.size()) throw GridMismatchError("wavefunction length does not match grid");
  if (!values.allFinite()) throw std::invalid_argument("wavefunction has non-finite entries");
  return WaveFunction{grid, std::move(values)};
}

WaveFunction sample(const Grid& grid, const std::function<cplx(const Eigen::VectorXd&)>& fn) {
  Eigen::VectorXcd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) v[i] = fn(grid.point(i));
  return make_wavefunction(grid, std::move(v));
}

namespace {

// (-1)^k with k the signed frequency index of centered position m.
inline double alt_sign(int m, int n) { return ((m - n / 2) & 1) ? -1.0 : 1.0; }

// Centered order <-> FFT order is an fftshift for even N.
void fftshift(const Grid& g, Eigen::VectorXcd& v, bool inverse) {
  const int n = g.points();
  const int half = n / 2;
  Eigen::VectorXcd out(v.size());
  if (g.dim() == 1) {
    for (int m = 0; m < n; ++m) {
      const int src = (m + half) % n;
      if (inverse) out[src] = v[m];
      else out[m] = v[src];
    }
  } else {
    for (int m0 = 0; m0 < n; ++m0)
      for (int m1 = 0; m1 < n; ++m1) {
        const Index c = Index(m0) * n + m1;
        const Index f = Index((m0 + half) % n) * n + (m1 + half) % n;
        if (inverse) out[f] = v[c];
        else out[c] = v[f];
      }
  }
  v.swap(out);
}

void apply_alternation(const Grid& g, Eigen::VectorXcd& v) {
  const int n = g.points();
  for (Index i = 0; i < v.size(); ++i) {
    auto idx = g.unravel(i);
    double s = alt_sign(idx[0], n);
    if (g.dim() == 2) s *= alt_sign(idx[1], n);
    v[i] *= s;
  }
}

}  // namespace

Spectrum dft(const WaveFunction& f) {
  if (f.values.size() != f.grid.size()) throw GridMismatchError("wavefunction length does not match grid");
  Eigen::VectorXcd v = f.values;
  detail::fft_inplace(v.data(), f.grid.points(), f.grid.dim(), -1);
  fftshift(f.grid, v, false);
  apply_alternation(f.grid, v);
  v *= f.grid.cell();
  return Spectrum{f.grid, std::move(v)};
}

WaveFunction inverse_dft(const Spectrum& s) {
  if (s.values.size() != s.grid.size()) throw GridMismatchError("spectrum length does not match grid");
  Eigen::VectorXcd v = s.values;
  apply_alternation(s.grid, v);
  fftshift(s.grid, v, true);
  detail::fft_inplace(v.data(), s.grid.points(), s.grid.dim(), +1);
  v *= s.grid.freq_cell();
  return WaveFunction{s.grid, std::move(v)};
}

Eigen::VectorXcd apply_multiplier(const Grid& grid, const Eigen::VectorXcd& values,
                                  const Eigen::VectorXcd& multiplier) {
  Spectrum s = dft(WaveFunction{grid, values});
  s.values.array() *= multiplier.array();
  return inverse_dft(s).values;
}

cplx inner(const WaveFunction& f, const WaveFunction& g) {
  if (!(f.grid == g.grid)) throw GridMismatchError("inner product of functions on different grids");
  std::vector<cplx> terms(static_cast<std::size_t>(f.values.size()));
  for (Index i = 0; i < f.values.size(); ++i) terms[std::size_t(i)] = f.values[i] * std::conj(g.values[i]);
  return f.grid.cell() * pairwise_sum(std::span<const cplx>(terms));
}

double l2_norm(const WaveFunction& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

double boundary_mass(const WaveFunction& f) {
  const double edge = 0.9 * f.grid.half_width();
  std::vector<double> all, shell;
  all.reserve(std::size_t(f.values.size()));
  for (Index i = 0; i < f.values.size(); ++i) {
    const double m = std::norm(f.values[i]);
    all.push_back(m);
    const Eigen::VectorXd x = f.grid.point(i);
    if (x.cwiseAbs().maxCoeff() >= edge) shell.push_back(m);
  }
  const double total = pairwise_sum(std::span<const double>(all));
  if (total == 0.0) return 0.0;
  return pairwise_sum(std::span<const double>(shell)) / total;
}

namespace {

Eigen::VectorXcd shift_by(const Grid& grid, const Eigen::VectorXcd& values, double sign) {
  if (grid.dim() != 1) throw std::invalid_argument("half shift is defined for d = 1");
  const double h = grid.spacing();
  Eigen::VectorXcd m(grid.points());
  for (int k = 0; k < grid.points(); ++k)
    m[k] = k == 0 ? cplx(0.0) : std::exp(cplx(0.0, sign * kTwoPi * grid.frequency(k) * 0.5 * h));
  return apply_multiplier(grid, values, m);
}

}  // namespace

Eigen::VectorXcd half_shift(const Grid& grid, const Eigen::VectorXcd& values) {
  return shift_by(grid, values, +1.0);
}

Eigen::VectorXcd half_shift_adjoint(const Grid& grid, const Eigen::VectorXcd& values) {
  return shift_by(grid, values, -1.0);
}

WaveFunction gaussian(const Grid& grid, double width, const Eigen::VectorXd& center,
                      const Eigen::VectorXd& frequency) {
  const int d = grid.dim();
  if (center.size() != d || frequency.size() != d) throw std::invalid_argument("gaussian: dimension mismatch");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  const double amp = std::pow(2.0, 0.25 * d) * std::pow(width, -0.5 * d);
  return sample(grid, [&](const Eigen::VectorXd& x) {
    const double r2 = (x - center).squaredNorm();
    return amp * std::exp(-kPi * r2 / (width * width)) * std::exp(cplx(0.0, kTwoPi * frequency.dot(x)));
  });
}

WaveFunction standard_gaussian(const Grid& grid) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.dim());
  return gaussian(grid, 1.0, zero, zero);
}

namespace {

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

}  // namespace

double CompactWindow::operator()(const Grid& grid, const Eigen::VectorXd& x) const {
  const double a = inner_fraction * grid.half_width();
  const double b = outer_fraction * grid.half_width();
  double v = 1.0;
  for (Index i = 0; i < x.size(); ++i) v *= 1.0 - smooth_step((std::abs(x[i]) - a) / (b - a));
  return v;
}

Eigen::VectorXd CompactWindow::sample(const Grid& grid) const {
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) v[i] = (*this)(grid, grid.point(i));
  return v;
}

bool CompactWindow::in_core(const Grid& grid, const Eigen::VectorXd& x) const {
  return x.cwiseAbs().maxCoeff() <= inner_fraction * grid.half_width() + 1e-12;
}

}  // namespace ftlab
