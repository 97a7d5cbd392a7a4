#include "ftlab/propagators.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace ftlab {

std::string to_string(KernelProvenance p) {
  switch (p) {
    case KernelProvenance::metaplectic: return "metaplectic";
    case KernelProvenance::mehler: return "mehler";
    case KernelProvenance::eigensolver: return "eigensolver";
    case KernelProvenance::trotter: return "trotter";
    case KernelProvenance::quadrature: return "quadrature";
  }
  return "unknown";
}

std::string to_string(FreeStep f) { return f == FreeStep::spectral ? "spectral" : "sampled_metaplectic"; }
std::string to_string(Placement p) { return p == Placement::start ? "start" : "end"; }

namespace {

bool at_nyquist(const Grid& g, int m) { return m == 0 && g.points() % 2 == 0; }

// Kinetic multiplier 1/2 xi.C xi on the centered frequency lattice. Mixed terms
// vanish on the Nyquist row/column so the realization stays real-symmetric.
Eigen::VectorXd kinetic_symbol(const QuadraticHamiltonian& h, const Grid& g) {
  Eigen::VectorXd s(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const auto idx = g.unravel(i);
    const Eigen::VectorXd xi = g.frequency_point(i);
    double v = 0.0;
    for (int a = 0; a < g.dim(); ++a)
      for (int b = 0; b < g.dim(); ++b) {
        if (a != b && (at_nyquist(g, idx[a]) || at_nyquist(g, idx[b]))) continue;
        v += 0.5 * h.C(a, b) * xi[a] * xi[b];
      }
    s[i] = v;
  }
  return s;
}

Eigen::MatrixXcd multiplier_matrix(const Grid& g, const Eigen::VectorXcd& m) {
  const Index n = g.size();
  Eigen::MatrixXcd out(n, n);
  parallel_for(n, [&](Index b, Index e) {
    for (Index k = b; k < e; ++k) {
      Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(n);
      unit[k] = 1.0;
      out.col(k) = apply_multiplier(g, unit, m);
    }
  });
  return out;
}

}  // namespace

Eigen::MatrixXcd grid_hamiltonian(const QuadraticHamiltonian& h, const Grid& grid, bool include_potential) {
  h.validate();
  if (h.dim != grid.dim()) throw GridMismatchError("hamiltonian dimension does not match grid");
  const Index n = grid.size();
  const int d = grid.dim();
  Eigen::MatrixXcd H = multiplier_matrix(grid, kinetic_symbol(h, grid).cast<cplx>());

  Eigen::VectorXcd diag(n);
  const Eigen::VectorXcd v = include_potential ? h.potential.sample(grid) : Eigen::VectorXcd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = grid.point(i);
    diag[i] = 0.5 * x.dot(h.A * x) + v[i];
  }
  H.diagonal() += diag;

  if (!h.B.isZero(0.0)) {
    for (int a = 0; a < d; ++a) {
      Eigen::VectorXcd m(n);
      for (Index i = 0; i < n; ++i) {
        const auto idx = grid.unravel(i);
        m[i] = at_nyquist(grid, idx[a]) ? 0.0 : grid.frequency_point(i)[a];
      }
      const Eigen::MatrixXcd P = multiplier_matrix(grid, m);
      for (int b = 0; b < d; ++b) {
        const double coef = h.B(a, b);
        if (coef == 0.0) continue;
        for (Index c = 0; c < n; ++c) {
          const double xc = grid.point(c)[b];
          for (Index r = 0; r < n; ++r) H(r, c) += coef * 0.5 * P(r, c) * (grid.point(r)[b] + xc);
        }
      }
    }
  }
  return H;
}

SpectralPropagator::SpectralPropagator(const QuadraticHamiltonian& h, const Grid& grid, bool include_potential)
    : grid_(grid) {
  h.validate();
  if (h.dim != grid.dim()) throw GridMismatchError("hamiltonian dimension does not match grid");
  const bool no_v = !include_potential || h.potential.is_zero();
  if (h.kinetic_only() && no_v) {
    multiplier_path_ = true;
    symbol_ = kinetic_symbol(h, grid);
    return;
  }
  h_ = grid_hamiltonian(h, grid, include_potential);
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
  hermitian_ = (h_ - h_.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

void SpectralPropagator::decompose() const {
  if (decomposed_) return;
  if (!hermitian_) throw NonUnitaryError("eigendecomposition requested for a non-Hermitian grid Hamiltonian");
  if (multiplier_path_) {
    // Plane waves diagonalize the multiplier; build them explicitly when asked.
    const Index n = grid_.size();
    evals_ = symbol_;
    evecs_.resize(n, n);
    for (Index k = 0; k < n; ++k) {
      const Eigen::VectorXd xi = grid_.frequency_point(k);
      for (Index j = 0; j < n; ++j)
        evecs_(j, k) = std::exp(cplx(0.0, kTwoPi * xi.dot(grid_.point(j)))) / std::sqrt(double(n));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (h_ + h_.adjoint()));
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }
  decomposed_ = true;
}

void SpectralPropagator::prepare() const {
  if (!multiplier_path_ && hermitian_) decompose();
}

const Eigen::VectorXd& SpectralPropagator::eigenvalues() const {
  decompose();
  return evals_;
}

const Eigen::MatrixXcd& SpectralPropagator::eigenvectors() const {
  decompose();
  return evecs_;
}

Eigen::MatrixXcd SpectralPropagator::operator_at(double t) const {
  if (multiplier_path_) {
    const Eigen::VectorXcd m = (cplx(0.0, -t) * symbol_.cast<cplx>()).array().exp();
    return multiplier_matrix(grid_, m);
  }
  if (!hermitian_) return (cplx(0.0, -t) * h_).exp();
  decompose();
  const Eigen::VectorXcd phases = (cplx(0.0, -t) * evals_.cast<cplx>()).array().exp();
  return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

Eigen::VectorXcd SpectralPropagator::apply(double t, const Eigen::VectorXcd& v) const {
  if (v.size() != grid_.size()) throw GridMismatchError("propagator input length mismatch");
  if (multiplier_path_) {
    const Eigen::VectorXcd m = (cplx(0.0, -t) * symbol_.cast<cplx>()).array().exp();
    return apply_multiplier(grid_, v, m);
  }
  if (!hermitian_) return (cplx(0.0, -t) * h_).exp() * v;
  decompose();
  const Eigen::VectorXcd phases = (cplx(0.0, -t) * evals_.cast<cplx>()).array().exp();
  return evecs_ * (phases.asDiagonal() * (evecs_.adjoint() * v));
}

SampledKernel SpectralPropagator::kernel(double t) const {
  SampledKernel k;
  k.grid = grid_;
  k.values = operator_at(t) / grid_.cell();
  k.t = t;
  k.provenance = KernelProvenance::eigensolver;
  k.unitary = hermitian_;
  return k;
}

double SpectralPropagator::ground_state_band_mass() const {
  decompose();
  Index g = 0;
  evals_.minCoeff(&g);
  const Spectrum s = dft(WaveFunction{grid_, evecs_.col(g)});
  const int n = grid_.points();
  double outer = 0.0, total = 0.0;
  for (Index i = 0; i < s.values.size(); ++i) {
    const auto idx = grid_.unravel(i);
    const double m = std::norm(s.values[i]);
    total += m;
    bool edge = false;
    for (int a = 0; a < grid_.dim(); ++a) edge = edge || std::abs(idx[a] - n / 2) >= 3 * n / 8;
    if (edge) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

SampledKernel eigensolver_reference(const QuadraticHamiltonian& h, double t, const Grid& grid) {
  return SpectralPropagator(h, grid, true).kernel(t);
}

PhaseCalibration calibrate_phase(const WaveFunction& reference_image, const WaveFunction& candidate_image) {
  const cplx z = inner(candidate_image, reference_image);
  if (std::abs(z) < 1e-300) throw ResolutionError("phase calibration probe has vanishing overlap");
  // z = c <Kg, Ug>; the phase aligning the candidate with the reference is conj(z/|z|).
  return PhaseCalibration{std::conj(z) / std::abs(z), std::abs(std::abs(z) - 1.0)};
}

MetaplecticKernelSpec metaplectic_spec(const QuadraticHamiltonian& h, double t) {
  MetaplecticKernelSpec s;
  s.flow = flow_at(h, t);
  const double det = s.flow.det_b();
  if (s.flow.near_exceptional())
    throw ExceptionalTimeError("t lies in the exceptional set: det B_t is degenerate", t, det);
  const Eigen::MatrixXd b = s.flow.B();
  s.b_inv = b.inverse();
  s.db_inv = s.flow.D() * s.b_inv;
  s.b_inv_a = s.b_inv * s.flow.A();
  s.amplitude = 1.0 / std::sqrt(std::abs(det));
  return s;
}

double phase_phi(const MetaplecticKernelSpec& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return 0.5 * x.dot(s.db_inv * x) - y.dot(s.b_inv * x) + 0.5 * y.dot(s.b_inv_a * y);
}

namespace {

Eigen::MatrixXcd fill_kernel(const Grid& grid, double amplitude,
                             const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& phase) {
  const Index n = grid.size();
  Eigen::MatrixXcd k(n, n);
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pts[std::size_t(i)] = grid.point(i);
  parallel_for(n, [&](Index b, Index e) {
    for (Index c = b; c < e; ++c)
      for (Index r = 0; r < n; ++r)
        k(r, c) = amplitude * std::exp(cplx(0.0, kTwoPi * phase(pts[std::size_t(r)], pts[std::size_t(c)])));
  });
  return k;
}

WaveFunction probe(const Grid& g, double shift, double width = 1.0) {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(g.dim(), shift);
  return gaussian(g, width, c, Eigen::VectorXd::Zero(g.dim()));
}

// A probe of width w leaves with spread ~ sqrt(w^2 + |B_t|^2 / w^2); w = sqrt|B_t| keeps the
// image away from the periodic boundary of the reference for long shears (free flow).
double probe_width(const MetaplecticKernelSpec& s, const Grid& g) {
  const double b = Eigen::JacobiSVD<Eigen::MatrixXd>(s.flow.B()).singularValues()[0];
  return std::clamp(std::sqrt(b), 1.0, std::max(1.0, g.half_width() / 6.0));
}

}  // namespace

SampledKernel metaplectic_kernel(const QuadraticHamiltonian& h, double t, const Grid& grid,
                                 const SpectralPropagator* reference) {
  if (h.dim != grid.dim()) throw GridMismatchError("hamiltonian dimension does not match grid");
  const MetaplecticKernelSpec s = metaplectic_spec(h, t);
  SampledKernel k;
  k.grid = grid;
  k.t = t;
  k.provenance = KernelProvenance::metaplectic;
  k.values = fill_kernel(grid, s.amplitude, [&](const auto& x, const auto& y) { return phase_phi(s, x, y); });

  std::unique_ptr<SpectralPropagator> owned;
  if (!reference) {
    owned = std::make_unique<SpectralPropagator>(h, grid, false);
    reference = owned.get();
  }
  const WaveFunction g = probe(grid, 0.0, probe_width(s, grid));
  const WaveFunction ref{grid, reference->apply(t, g.values)};
  const WaveFunction cand{grid, grid.cell() * (k.values * g.values)};
  const PhaseCalibration cal = calibrate_phase(ref, cand);
  k.phase = cal.phase;
  k.phase_deviation = cal.deviation;
  k.values *= cal.phase;
  return k;
}

cplx mehler_constant(int k) { return std::exp(cplx(0.0, -kPi * (2.0 * k + 1.0) / 4.0)); }

MehlerResult mehler_kernel(double t, const Grid& grid, const SpectralPropagator* reference) {
  const QuadraticHamiltonian ho = harmonic_oscillator(grid.dim());
  std::unique_ptr<SpectralPropagator> owned;
  if (!reference) {
    owned = std::make_unique<SpectralPropagator>(ho, grid, false);
    reference = owned.get();
  }
  const int d = grid.dim();
  const long k_near = std::lround(t / kPi);
  if (std::abs(t - double(k_near) * kPi) <= 1e-12 * std::max(1.0, std::abs(t))) {
    ReflectionDescriptor r;
    r.t = t;
    r.k = int(k_near);
    r.parity = (k_near % 2 == 0) ? 1 : -1;
    const WaveFunction g = probe(grid, 1.0);
    const WaveFunction ref{grid, reference->apply(t, g.values)};
    // Candidate image c' g(s x), s = parity.
    const WaveFunction cand = sample(grid, [&](const Eigen::VectorXd& x) {
      const Eigen::VectorXd c = Eigen::VectorXd::Constant(d, 1.0);
      return std::pow(2.0, 0.25 * d) * std::exp(-kPi * (double(r.parity) * x - c).squaredNorm());
    });
    const PhaseCalibration cal = calibrate_phase(ref, cand);
    r.c_prime = cal.phase;
    r.deviation = cal.deviation;
    return r;
  }
  const double st = std::sin(t), ct = std::cos(t);
  SampledKernel out;
  out.grid = grid;
  out.t = t;
  out.provenance = KernelProvenance::mehler;
  out.values = fill_kernel(grid, std::pow(std::abs(st), -0.5 * d), [&](const auto& x, const auto& y) {
    return 0.5 * (x.squaredNorm() + y.squaredNorm()) * ct / st - x.dot(y) / st;
  });
  const WaveFunction g = probe(grid, 0.0);
  const WaveFunction ref{grid, reference->apply(t, g.values)};
  const WaveFunction cand{grid, grid.cell() * (out.values * g.values)};
  const PhaseCalibration cal = calibrate_phase(ref, cand);
  out.phase = cal.phase;
  out.phase_deviation = cal.deviation;
  out.values *= cal.phase;
  return out;
}

TrotterPropagator::TrotterPropagator(QuadraticHamiltonian h, Grid grid, TrotterOptions opts)
    : h_(std::move(h)), grid_(grid), opts_(opts) {
  h_.validate();
  if (h_.dim != grid_.dim()) throw GridMismatchError("hamiltonian dimension does not match grid");
  free_ = std::make_shared<SpectralPropagator>(h_, grid_, false);
  potential_ = h_.potential.sample(grid_);
}

int TrotterPropagator::resolve_steps(double t, int n) const {
  if (n < 1) throw std::invalid_argument("trotter: n must be >= 1");
  if (opts_.free_step != FreeStep::sampled_metaplectic || t == 0.0) return n;
  for (int m = n; m <= n + opts_.max_step_increment; ++m)
    if (!flow_at(h_, t / m).near_exceptional()) return m;
  throw UnresolvedError("trotter: every step count in [n, n + increment] puts t/n in the exceptional set");
}

Eigen::MatrixXcd TrotterPropagator::free_step(double tau) const {
  if (opts_.free_step == FreeStep::spectral) return free_->operator_at(tau);
  return metaplectic_kernel(h_, tau, grid_, free_.get()).as_operator();
}

Eigen::MatrixXcd TrotterPropagator::operator_at(double t, int n) const {
  const Index size = grid_.size();
  if (t == 0.0) return Eigen::MatrixXcd::Identity(size, size);
  const int m = resolve_steps(t, n);
  const double tau = t / m;
  const Eigen::VectorXcd dv = (cplx(0.0, -tau) * potential_).array().exp();
  Eigen::MatrixXcd step = free_step(tau);
  if (opts_.placement == Placement::start) step = step * dv.asDiagonal();
  else step = dv.asDiagonal() * step;
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(size, size);
  bool first = true;
  for (int e = m; e > 0; e >>= 1) {
    if (e & 1) {
      result = first ? step : Eigen::MatrixXcd(result * step);
      first = false;
    }
    if (e > 1) step = step * step;
  }
  return result;
}

Eigen::VectorXcd TrotterPropagator::apply(double t, int n, const Eigen::VectorXcd& v) const {
  if (v.size() != grid_.size()) throw GridMismatchError("trotter input length mismatch");
  if (t == 0.0) return v;
  const int m = resolve_steps(t, n);
  const double tau = t / m;
  const Eigen::VectorXcd dv = (cplx(0.0, -tau) * potential_).array().exp();
  const bool fast = opts_.free_step == FreeStep::spectral && h_.kinetic_only();
  Eigen::MatrixXcd step;
  if (!fast) step = free_step(tau);
  Eigen::VectorXcd w = v;
  for (int i = 0; i < m; ++i) {
    if (opts_.placement == Placement::start) w = w.cwiseProduct(dv);
    w = fast ? free_->apply(tau, w) : Eigen::VectorXcd(step * w);
    if (opts_.placement == Placement::end) w = w.cwiseProduct(dv);
  }
  return w;
}

SampledKernel TrotterPropagator::kernel(double t, int n) const {
  SampledKernel k;
  k.grid = grid_;
  k.t = t;
  k.steps = t == 0.0 ? n : resolve_steps(t, n);
  k.provenance = KernelProvenance::trotter;
  k.values = operator_at(t, n) / grid_.cell();
  k.unitary = h_.potential.is_real();
  return k;
}

SampledKernel trotter_propagator(const QuadraticHamiltonian& h, double t, int n, const Grid& grid,
                                 TrotterOptions opts) {
  return TrotterPropagator(h, grid, opts).kernel(t, n);
}

double unitarity_defect(const Eigen::MatrixXcd& op) {
  const Index n = op.rows();
  return (op.adjoint() * op - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace ftlab
