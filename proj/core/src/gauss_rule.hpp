#pragma once

#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "ftlab/lattice.hpp"

namespace ftlab::detail {

struct QuadratureRule {
  std::vector<double> nodes, weights;
};

// Composite 8-point Gauss-Legendre rule on [-L, L], one panel per grid cell.
inline QuadratureRule panel_rule(const Grid& g) {
  using gl = boost::math::quadrature::gauss<double, 8>;
  const auto& ab = gl::abscissa();
  const auto& wt = gl::weights();
  std::vector<double> x, w;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    x.push_back(-ab[i]);
    w.push_back(wt[i]);
    if (ab[i] != 0.0) {
      x.push_back(ab[i]);
      w.push_back(wt[i]);
    }
  }
  const double h = g.spacing();
  QuadratureRule r;
  for (int p = 0; p < g.points(); ++p) {
    const double mid = g.node(p) + 0.5 * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.nodes.push_back(mid + 0.5 * h * x[i]);
      r.weights.push_back(0.5 * h * w[i]);
    }
  }
  return r;
}

}  // namespace ftlab::detail
