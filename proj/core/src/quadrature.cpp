#include <cmath>
#include <vector>

#include "ftlab/propagators.hpp"
#include "gauss_rule.hpp"

namespace ftlab {

namespace {

Eigen::MatrixXd mass_matrix(const QuadraticHamiltonian& h) {
  if (!h.kinetic_only()) throw std::invalid_argument("time-slice action requires a kinetic-only hamiltonian");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(h.C);
  if (!lu.isInvertible()) throw std::invalid_argument("time-slice action requires an invertible C");
  return 4.0 * kPi * kPi * lu.inverse();
}

}  // namespace

double action_sum(const QuadraticHamiltonian& h, double t, const std::vector<Eigen::VectorXd>& vertices,
                  Placement placement) {
  if (vertices.size() < 2) throw std::invalid_argument("action_sum: need at least two vertices");
  if (!h.potential.is_real()) throw std::invalid_argument("action_sum: potential must be real");
  const Eigen::MatrixXd m = mass_matrix(h);
  const std::size_t n = vertices.size() - 1;
  const double tau = t / double(n);
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const Eigen::VectorXd v = (vertices[k] - vertices[k - 1]) / tau;
    const Eigen::VectorXd& xv = placement == Placement::end ? vertices[k] : vertices[k - 1];
    s += tau * (0.5 * v.dot(m * v) - h.potential(xv).real());
  }
  return s;
}

cplx timeslice_kernel_quadrature(const QuadraticHamiltonian& h, double t, int n, const Grid& grid, double x,
                                 double y, Placement placement) {
  if (grid.dim() != 1 || h.dim != 1) throw std::invalid_argument("time-slice quadrature is implemented for d = 1");
  if (n < 1 || n > 3) throw std::invalid_argument("time-slice quadrature supports n in {1, 2, 3}");
  if (t == 0.0) throw ExceptionalTimeError("time-slice kernel is singular at t = 0", t, 0.0);
  const double mass = mass_matrix(h)(0, 0);
  const double tau = t / n;
  // Free kernel (m / (2 pi i tau))^{1/2} e^{i m (a-b)^2 / (2 tau)}.
  const cplx pref = std::sqrt(cplx(mass, 0.0) / cplx(0.0, kTwoPi * tau));
  auto k0 = [&](double a, double b) { return pref * std::exp(cplx(0.0, mass * (a - b) * (a - b) / (2.0 * tau))); };
  auto dv = [&](double p) {
    Eigen::VectorXd v(1);
    v[0] = p;
    return std::exp(cplx(0.0, -tau) * h.potential(v));
  };
  // Potential factor for the slice that leaves vertex `from` and arrives at `to`.
  auto slice = [&](double to, double from) {
    return k0(to, from) * (placement == Placement::start ? dv(from) : dv(to));
  };
  if (n == 1) return slice(x, y);
  const detail::QuadratureRule r = detail::panel_rule(grid);
  const std::size_t m = r.nodes.size();
  if (n == 2) {
    std::vector<cplx> terms(m);
    for (std::size_t i = 0; i < m; ++i) terms[i] = r.weights[i] * slice(x, r.nodes[i]) * slice(r.nodes[i], y);
    return pairwise_sum(std::span<const cplx>(terms));
  }
  // n = 3: iterate the inner integral G(x2) = int slice(x2, x1) slice(x1, y) dx1.
  std::vector<cplx> first(m), g(m), terms(m);
  for (std::size_t i = 0; i < m; ++i) first[i] = r.weights[i] * slice(r.nodes[i], y);
  parallel_for(Index(m), [&](Index b, Index e) {
    std::vector<cplx> row(m);
    for (Index j = b; j < e; ++j) {
      for (std::size_t i = 0; i < m; ++i) row[i] = slice(r.nodes[std::size_t(j)], r.nodes[i]) * first[i];
      g[std::size_t(j)] = pairwise_sum(std::span<const cplx>(row));
    }
  });
  for (std::size_t j = 0; j < m; ++j) terms[j] = r.weights[j] * slice(x, r.nodes[j]) * g[j];
  return pairwise_sum(std::span<const cplx>(terms));
}

}  // namespace ftlab
