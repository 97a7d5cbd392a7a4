#include "ftlab/timefreq.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fft.hpp"
#include "gauss_rule.hpp"

namespace ftlab {

std::string to_string(NormFlavor f) {
  switch (f) {
    case NormFlavor::modulation: return "modulation";
    case NormFlavor::fourier_lebesgue: return "fourier_lebesgue";
    case NormFlavor::localized_fourier_lebesgue: return "localized_fourier_lebesgue";
  }
  return "unknown";
}

Window gaussian_window(const Grid& grid, double width) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.dim());
  return Window{width, gaussian(grid, width, zero, zero)};
}

Eigen::VectorXd STFTGram::position(Index row) const {
  const int np = positions_per_axis();
  Eigen::VectorXd x(grid.dim());
  if (grid.dim() == 1) x[0] = grid.node(int(row) * stride);
  else {
    x[0] = grid.node(int(row / np) * stride);
    x[1] = grid.node(int(row % np) * stride);
  }
  return x;
}

Eigen::VectorXd STFTGram::frequency(Index col) const {
  const double db = beta();
  Eigen::VectorXd xi(grid.dim());
  if (grid.dim() == 1) xi[0] = (double(col) - patch / 2) * db;
  else {
    xi[0] = (double(col / patch) - patch / 2) * db;
    xi[1] = (double(col % patch) - patch / 2) * db;
  }
  return xi;
}

namespace {

inline int wrap(long i, int n) {
  const long r = i % n;
  return int(r < 0 ? r + n : r);
}

// One STFT row for the window centered at node multi-index (p0, p1).
void stft_row(const WaveFunction& f, const WaveFunction& g, int patch, int p0, int p1, cplx* out,
              std::vector<cplx>& buf) {
  const Grid& grid = f.grid;
  const int n = grid.points();
  const int half = patch / 2;
  const double h = grid.spacing();
  const double db = 1.0 / (patch * h);
  if (grid.dim() == 1) {
    buf.assign(std::size_t(patch), 0.0);
    for (int r = 0; r < patch; ++r)
      buf[std::size_t(r)] = f.values[wrap(p0 + r - half, n)] * std::conj(g.values[wrap(r - half + n / 2, n)]);
    detail::fft_inplace(buf.data(), patch, 1, -1);
    const double x = grid.node(p0);
    for (int k = 0; k < patch; ++k) {
      const int ks = k - half;
      const double sign = (ks & 1) ? -1.0 : 1.0;
      out[k] = h * sign * std::exp(cplx(0.0, -kTwoPi * x * ks * db)) * buf[std::size_t(wrap(ks, patch))];
    }
    return;
  }
  buf.assign(std::size_t(patch) * patch, 0.0);
  for (int r0 = 0; r0 < patch; ++r0)
    for (int r1 = 0; r1 < patch; ++r1) {
      const Index fi = Index(wrap(p0 + r0 - half, n)) * n + wrap(p1 + r1 - half, n);
      const Index gi = Index(wrap(r0 - half + n / 2, n)) * n + wrap(r1 - half + n / 2, n);
      buf[std::size_t(r0) * patch + r1] = f.values[fi] * std::conj(g.values[gi]);
    }
  detail::fft_inplace(buf.data(), patch, 2, -1);
  const double x0 = grid.node(p0), x1 = grid.node(p1);
  for (int k0 = 0; k0 < patch; ++k0)
    for (int k1 = 0; k1 < patch; ++k1) {
      const int s0 = k0 - half, s1 = k1 - half;
      const double sign = ((s0 + s1) & 1) ? -1.0 : 1.0;
      const double ph = -kTwoPi * (x0 * s0 + x1 * s1) * db;
      out[std::size_t(k0) * patch + k1] =
          h * h * sign * std::exp(cplx(0.0, ph)) * buf[std::size_t(wrap(s0, patch)) * patch + wrap(s1, patch)];
    }
}

int resolve_patch(const Grid& grid, const StftLattice& lat) {
  const int p = lat.patch == 0 ? grid.points() : lat.patch;
  if (p < 2 || p % 2 != 0 || p > grid.points()) throw std::invalid_argument("stft patch must be even and <= N");
  if (lat.stride < 1 || grid.points() % lat.stride != 0)
    throw std::invalid_argument("stft stride must divide the number of grid points");
  return p;
}

}  // namespace

STFTGram stft(const WaveFunction& f, const Window& g, StftLattice lattice) {
  if (!(f.grid == g.sampled.grid)) throw GridMismatchError("stft: window and function live on different grids");
  STFTGram out;
  out.grid = f.grid;
  out.stride = lattice.stride;
  out.patch = resolve_patch(f.grid, lattice);
  const int np = out.positions_per_axis();
  const int d = f.grid.dim();
  const Index rows = d == 1 ? np : Index(np) * np;
  const Index cols = d == 1 ? out.patch : Index(out.patch) * out.patch;
  // Row-major storage so each row is contiguous for stft_row.
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(rows, cols);
  parallel_for(rows, [&](Index b, Index e) {
    std::vector<cplx> buf;
    for (Index r = b; r < e; ++r) {
      const int p0 = d == 1 ? int(r) * out.stride : int(r / np) * out.stride;
      const int p1 = d == 1 ? 0 : int(r % np) * out.stride;
      stft_row(f, g.sampled, out.patch, p0, p1, v.row(r).data(), buf);
    }
  });
  out.values = v;
  return out;
}

cplx gram_pairing(const STFTGram& a, const STFTGram& b) {
  if (!(a.grid == b.grid) || a.stride != b.stride || a.patch != b.patch)
    throw GridMismatchError("gram_pairing: lattices differ");
  std::vector<cplx> terms(static_cast<std::size_t>(a.values.size()));
  for (Index i = 0; i < a.values.size(); ++i)
    terms[std::size_t(i)] = a.values.data()[i] * std::conj(b.values.data()[i]);
  return a.cell() * pairwise_sum(std::span<const cplx>(terms));
}

WaveFunction kernel_as_function(const SampledKernel& k) {
  if (k.grid.dim() != 1) throw std::invalid_argument("kernel_as_function requires d = 1");
  const int n = k.grid.points();
  Grid g2(2, n, k.grid.half_width());
  Eigen::VectorXcd v(g2.size());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) v[Index(r) * n + c] = k.values(r, c);
  return WaveFunction{g2, std::move(v)};
}

Eigen::MatrixXcd wigner(const WaveFunction& f, const WaveFunction& g) {
  if (!(f.grid == g.grid)) throw GridMismatchError("wigner: grids differ");
  if (f.grid.dim() != 1) throw std::invalid_argument("wigner is implemented for d = 1");
  const int n = f.grid.points();
  const double h = f.grid.spacing();
  const Eigen::VectorXcd sf = half_shift(f.grid, f.values);
  const Eigen::VectorXcd sg = half_shift(g.grid, g.values);
  Eigen::MatrixXcd w(n, n);
  parallel_for(n, [&](Index b, Index e) {
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    for (Index mi = b; mi < e; ++mi) {
      const int m = int(mi);
      std::fill(buf.begin(), buf.end(), cplx(0.0));
      for (int p = -n; p < n; ++p) {
        cplx val = 0.0;
        if ((p & 1) == 0) {
          const int q = p / 2, i1 = m + q, i2 = m - q;
          if (i1 < 0 || i1 >= n || i2 < 0 || i2 >= n) continue;
          val = f.values[i1] * std::conj(g.values[i2]);
        } else {
          const int q = (p - 1) / 2, i1 = m + q, i2 = m - q - 1;
          if (i1 < 0 || i1 >= n || i2 < 0 || i2 >= n) continue;
          val = sf[i1] * std::conj(sg[i2]);
        }
        buf[std::size_t(wrap(p, n))] += val;
      }
      detail::fft_inplace(buf.data(), n, 1, -1);
      for (int k = 0; k < n; ++k) w(m, k) = h * buf[std::size_t(wrap(k - n / 2, n))];
    }
  });
  return w;
}

WaveFunction weyl_apply(const Eigen::MatrixXcd& sigma, const WaveFunction& f) {
  const Grid& grid = f.grid;
  if (grid.dim() != 1) throw std::invalid_argument("weyl_apply is implemented for d = 1");
  const int n = grid.points();
  if (sigma.rows() != n || sigma.cols() != n) throw GridMismatchError("weyl_apply: symbol shape mismatch");
  const double h = grid.spacing();
  const double beta = grid.freq_spacing();

  // sigma_check(m, p) = beta sum_k sigma(x_m, xi_k) e^{2 pi i p k / N}
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sc(n, n);
  parallel_for(n, [&](Index b, Index e) {
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    for (Index m = b; m < e; ++m) {
      for (int k = 0; k < n; ++k) buf[std::size_t(wrap(k - n / 2, n))] = sigma(m, k);
      detail::fft_inplace(buf.data(), n, 1, +1);
      for (int p = 0; p < n; ++p) sc(m, p) = beta * buf[std::size_t(p)];
    }
  });

  const Eigen::VectorXcd sf = half_shift(grid, f.values);
  Eigen::VectorXcd even(n), odd(n);
  parallel_for(n, [&](Index b, Index e) {
    for (Index ji = b; ji < e; ++ji) {
      const int j = int(ji);
      cplx se = 0.0, so = 0.0;
      for (int q = -n / 2; q < n / 2; ++q) {
        const int m = j - q, src = j - 2 * q;
        if (m >= 0 && m < n && src >= 0 && src < n) se += f.values[src] * sc(m, wrap(2 * q, n));
        // Odd offsets: r = j plays the role of the shifted test index.
        const int mo = j - q, so_src = j - 2 * q - 1;
        if (mo >= 0 && mo < n && so_src >= 0 && so_src < n) so += sf[so_src] * sc(mo, wrap(2 * q + 1, n));
      }
      even[j] = h * se;
      odd[j] = h * so;
    }
  });
  Eigen::VectorXcd out = even + half_shift_adjoint(grid, odd);
  return WaveFunction{grid, std::move(out)};
}

double mod_norm(const WaveFunction& f, const NormSpec& spec, const Window& g) {
  if (std::abs(spec.s) > kMaxWeight) throw std::invalid_argument("weight exponent exceeds the supported cap");
  if (!(spec.p >= 1.0) || !(spec.q >= 1.0)) throw std::invalid_argument("norm exponents must be >= 1");
  const Grid& grid = f.grid;
  if (spec.flavor != NormFlavor::modulation) {
    WaveFunction h = f;
    if (spec.flavor == NormFlavor::localized_fourier_lebesgue)
      h.values = h.values.cwiseProduct(spec.window.sample(grid).cast<cplx>());
    const Spectrum s = dft(h);
    std::vector<double> terms(static_cast<std::size_t>(s.values.size()));
    for (Index i = 0; i < s.values.size(); ++i)
      terms[std::size_t(i)] =
          std::abs(s.values[i]) * std::pow(bracket(grid.frequency_point(i).squaredNorm()), spec.s);
    return grid.freq_cell() * pairwise_sum(std::span<const double>(terms));
  }
  const STFTGram v = stft(f, g, spec.lattice);
  const double ad = std::pow(v.alpha(), grid.dim());
  const double bd = std::pow(v.beta(), grid.dim());
  const Index rows = v.values.rows(), cols = v.values.cols();
  std::vector<double> outer(static_cast<std::size_t>(cols));
  std::vector<double> col(static_cast<std::size_t>(rows));
  for (Index c = 0; c < cols; ++c) {
    double inner_norm;
    if (std::isinf(spec.p)) {
      inner_norm = v.values.col(c).cwiseAbs().maxCoeff();
    } else {
      for (Index r = 0; r < rows; ++r) col[std::size_t(r)] = std::pow(std::abs(v.values(r, c)), spec.p);
      inner_norm = std::pow(ad * pairwise_sum(std::span<const double>(col)), 1.0 / spec.p);
    }
    const double w = std::pow(bracket(v.frequency(c).squaredNorm()), spec.s);
    outer[std::size_t(c)] = inner_norm * w;
  }
  if (std::isinf(spec.q)) return *std::max_element(outer.begin(), outer.end());
  for (double& o : outer) o = std::pow(o, spec.q);
  return std::pow(bd * pairwise_sum(std::span<const double>(outer)), 1.0 / spec.q);
}

Eigen::VectorXcd tf_shift(const Grid& grid, double width, const Eigen::VectorXd& x0, const Eigen::VectorXd& xi) {
  return gaussian(grid, width, x0, Eigen::VectorXd::Zero(grid.dim())).values.cwiseProduct(
      sample(grid, [&](const Eigen::VectorXd& x) { return std::exp(cplx(0.0, kTwoPi * xi.dot(x))); }).values);
}

cplx weakstar_pairing(const SampledKernel& k, const KernelAtom& atom) {
  const Grid& g = k.grid;
  const Eigen::VectorXcd phi1 = tf_shift(g, atom.width, atom.x0, atom.xi0);
  const Eigen::VectorXcd phi2 = tf_shift(g, atom.width, atom.y0, atom.eta0);
  const cplx v = phi1.adjoint() * (k.values * phi2.conjugate());
  return g.cell() * g.cell() * v;
}

cplx weakstar_pairing_stft(const SampledKernel& k, const KernelAtom& atom, double radius) {
  const WaveFunction kf = kernel_as_function(k);
  const Grid& g2 = kf.grid;
  const int n = g2.points();
  Eigen::VectorXd c(2), xi(2);
  c << atom.x0[0], atom.y0[0];
  xi << atom.xi0[0], atom.eta0[0];
  const WaveFunction phi{g2, tf_shift(g2, atom.width, c, xi)};
  const Window win = gaussian_window(g2, atom.width);
  const double two_l = 2.0 * g2.half_width();
  auto pdist = [&](double a, double b) {
    const double d = std::fmod(std::abs(a - b), two_l);
    return std::min(d, two_l - d);
  };
  std::vector<std::pair<int, int>> pos;
  for (int p0 = 0; p0 < n; ++p0)
    for (int p1 = 0; p1 < n; ++p1)
      if (std::hypot(pdist(g2.node(p0), c[0]), pdist(g2.node(p1), c[1])) <= radius) pos.emplace_back(p0, p1);
  std::vector<cplx> partial(pos.size());
  parallel_for(Index(pos.size()), [&](Index b, Index e) {
    std::vector<cplx> buf, va(std::size_t(n) * n), vb(std::size_t(n) * n);
    for (Index i = b; i < e; ++i) {
      stft_row(kf, win.sampled, n, pos[std::size_t(i)].first, pos[std::size_t(i)].second, va.data(), buf);
      stft_row(phi, win.sampled, n, pos[std::size_t(i)].first, pos[std::size_t(i)].second, vb.data(), buf);
      std::vector<cplx> t(va.size());
      for (std::size_t j = 0; j < va.size(); ++j) t[j] = va[j] * std::conj(vb[j]);
      partial[std::size_t(i)] = pairwise_sum(std::span<const cplx>(t));
    }
  });
  const double cell = std::pow(g2.spacing() * (1.0 / (n * g2.spacing())), 2);
  return cell * pairwise_sum(std::span<const cplx>(partial));
}

cplx weakstar_pairing(const ReflectionDescriptor& r, const KernelAtom& atom, const Grid& grid) {
  const int d = grid.dim();
  const double w = atom.width;
  const double amp = std::pow(2.0, 0.25) / std::sqrt(w);
  // Separable: the integrand factorizes over axes.
  const detail::QuadratureRule rule = detail::panel_rule(grid);
  cplx total = 1.0;
  for (int a = 0; a < d; ++a) {
    std::vector<cplx> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = rule.nodes[i];
      const double y = r.parity * x;
      const cplx p1 = amp * std::exp(-kPi * std::pow(x - atom.x0[a], 2) / (w * w)) *
                      std::exp(cplx(0.0, kTwoPi * atom.xi0[a] * x));
      const cplx p2 = amp * std::exp(-kPi * std::pow(y - atom.y0[a], 2) / (w * w)) *
                      std::exp(cplx(0.0, kTwoPi * atom.eta0[a] * y));
      terms[i] = rule.weights[i] * std::conj(p1 * p2);
    }
    total *= pairwise_sum(std::span<const cplx>(terms));
  }
  return r.c_prime * total;
}

DecayReport almost_diag_gram(const Eigen::MatrixXcd& sigma, const Grid& grid, const Window& g, GramOptions opts) {
  if (grid.dim() != 1) throw std::invalid_argument("almost_diag_gram is implemented for d = 1");
  if (opts.extent < 1 || !(opts.spacing > 0.0)) throw std::invalid_argument("almost_diag_gram: bad lattice");
  // Outermost atoms (plus three window widths) must sit inside both the box and the band.
  const double reach = opts.extent * opts.spacing + 3.0 * std::max(g.width, 1.0 / g.width);
  if (reach > grid.half_width() || reach > 0.5 / grid.spacing())
    throw ResolutionError("almost_diag_gram: phase-space lattice exceeds the grid box or band");
  const int side = 2 * opts.extent + 1;
  const Index m = Index(side) * side;
  auto coords = [&](Index i) {
    return std::make_pair(int(i / side) - opts.extent, int(i % side) - opts.extent);
  };
  Eigen::MatrixXcd phi(grid.size(), m), psi(grid.size(), m);
  parallel_for(m, [&](Index b, Index e) {
    for (Index i = b; i < e; ++i) {
      const auto [a, c] = coords(i);
      Eigen::VectorXd x0(1), xi(1);
      x0[0] = a * opts.spacing;
      xi[0] = c * opts.spacing;
      phi.col(i) = tf_shift(grid, g.width, x0, xi);
      psi.col(i) = weyl_apply(sigma, WaveFunction{grid, phi.col(i)}).values;
    }
  });
  DecayReport rep;
  rep.gram = (grid.cell() * (phi.adjoint() * psi)).cwiseAbs();  // gram(w, z) = |<sigma^w pi(z) g, pi(w) g>|

  std::map<int, double> env;
  for (Index z = 0; z < m; ++z)
    for (Index w = 0; w < m; ++w) {
      const auto [za, zc] = coords(z);
      const auto [wa, wc] = coords(w);
      const int key = (za - wa) * (za - wa) + (zc - wc) * (zc - wc);
      env[key] = std::max(env[key], rep.gram(w, z));
    }
  double peak = 0.0;
  for (const auto& [key, v] : env) {
    rep.radius.push_back(opts.spacing * std::sqrt(double(key)));
    rep.envelope.push_back(v);
    peak = std::max(peak, v);
  }
  // Least-squares fit of log env = log C - s log <r> over the tail r >= 1.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < rep.radius.size(); ++i) {
    if (rep.radius[i] < 1.0 || rep.envelope[i] <= 1e-12 * peak) continue;
    const double lx = std::log(bracket(rep.radius[i] * rep.radius[i]));
    const double ly = std::log(rep.envelope[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) rep.fitted_s = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  rep.fitted_c = 0.0;
  for (std::size_t i = 0; i < rep.radius.size(); ++i)
    rep.fitted_c = std::max(rep.fitted_c, rep.envelope[i] * std::pow(bracket(rep.radius[i] * rep.radius[i]), rep.fitted_s));

  const Index center = m / 2;
  double lhs = 0.0, rhs = 0.0;
  for (Index w = 0; w < m; ++w) {
    const auto [wa, wc] = coords(w);
    const double r2 = opts.spacing * opts.spacing * (wa * wa + wc * wc);
    lhs += rep.gram(w, center);
    rhs += rep.fitted_c * std::pow(bracket(r2), -rep.fitted_s);
  }
  rep.domination_ratio = rhs > 0.0 ? lhs / rhs : 0.0;
  return rep;
}

}  // namespace ftlab
