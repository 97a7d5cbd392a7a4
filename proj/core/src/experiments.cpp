#include "ftlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ftlab/io.hpp"
#include "json.hpp"

namespace ftlab {

StftLattice kernel_lattice(const Grid& g, double width) {
  const double h = g.spacing();
  int patch = 2;
  while (patch < 8.0 * width / h && patch < g.points()) patch *= 2;
  patch = std::min(patch, g.points());
  int stride = 1;
  for (int s = 1; s <= g.points(); ++s)
    if (g.points() % s == 0 && s <= std::max(1.0, 0.75 * width / h)) stride = s;
  return StftLattice{stride, patch};
}

namespace {

using Clock = std::chrono::steady_clock;

bool is_harmonic_preset(const QuadraticHamiltonian& h) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(h.dim, h.dim);
  return h.B.isZero(0.0) && (h.A - kTwoPi * id).isZero(0.0) && (h.C - kTwoPi * id).isZero(0.0);
}

double grid_lp(const WaveFunction& f, double p) {
  if (std::isinf(p)) return f.values.cwiseAbs().maxCoeff();
  std::vector<double> t(static_cast<std::size_t>(f.values.size()));
  for (Index i = 0; i < f.values.size(); ++i) t[std::size_t(i)] = std::pow(std::abs(f.values[i]), p);
  return std::pow(f.grid.cell() * pairwise_sum(std::span<const double>(t)), 1.0 / p);
}

bool tail_monotone(const std::vector<double>& v, int tail, double floor) {
  const std::size_t start = v.size() > std::size_t(tail) ? v.size() - std::size_t(tail) : 0;
  for (std::size_t i = start; i + 1 < v.size(); ++i)
    if (!(v[i + 1] <= v[i] || v[i + 1] <= floor)) return false;
  return true;
}

std::string fmt(double v) { return format_double(v); }

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt(v[i]);
  return os.str();
}

void validate_schedule(const std::vector<int>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty n-schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw std::invalid_argument("n-schedule entries must be >= 1");
    if (i && schedule[i] <= schedule[i - 1]) throw std::invalid_argument("n-schedule must be strictly increasing");
  }
}

// Shared machinery of the three kernel studies.
class KernelStudy {
 public:
  KernelStudy(const StudySetup& s, double t)
      : s_(s),
        t_(t),
        trotter_(s.hamiltonian, s.grid, s.trotter),
        reference_(s.hamiltonian, s.grid, true),
        window_(gaussian_window(s.grid, s.window_width)),
        atoms_(atom_battery(s)) {
    if (s.grid.dim() != 1) throw std::invalid_argument("kernel studies are implemented for d = 1");
    trotter_.free_propagator().prepare();
    reference_.prepare();
    band_mass_ = reference_.hermitian() ? reference_.ground_state_band_mass() : 0.0;
    if (band_mass_ > kBandMassLimit)
      throw ResolutionError("grid does not resolve the reference ground state (band mass " + fmt(band_mass_) + ")");
    u_ = reference_.kernel(t);
    const Grid g2(2, s.grid.points(), s.grid.half_width());
    window2_ = gaussian_window(g2, s.window_width);
    lattice2_ = kernel_lattice(s.grid, s.window_width);
    const SymplecticFlow flow = flow_at(s.hamiltonian, t);
    exceptional_ = flow.near_exceptional();
    if (!exceptional_) {
      const MetaplecticKernelSpec ms = metaplectic_spec(s.hamiltonian, t);
      const Index n = s.grid.size();
      flatten_.resize(n, n);
      for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < n; ++r)
          flatten_(r, c) = std::exp(cplx(0.0, -kTwoPi * phase_phi(ms, s.grid.point(r), s.grid.point(c))));
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    slice_atoms_ = {tf_shift(s.grid, s.window_width, zero, zero), tf_shift(s.grid, s.window_width, one, zero),
                    tf_shift(s.grid, s.window_width, zero, one)};
    if (is_harmonic_preset(s.hamiltonian) && exceptional_ && t != 0.0) {
      const auto m = mehler_kernel(t, s.grid, &trotter_.free_propagator());
      if (const auto* r = std::get_if<ReflectionDescriptor>(&m)) reflection_ = *r;
    }
  }

  bool exceptional() const { return exceptional_; }
  double band_mass() const { return band_mass_; }

  ConvergenceRow row(int n, bool rows_slice = true) const {
    const auto t0 = Clock::now();
    ConvergenceRow out;
    out.n = n;
    const SampledKernel e = trotter_.kernel(t_, n);
    out.steps_used = e.steps;
    SampledKernel diff = e;
    diff.values -= u_.values;
    const Grid& g = s_.grid;
    const Index size = g.size();

    double sup = 0.0;
    for (Index c = 0; c < size; ++c) {
      if (!s_.compact.in_core(g, g.point(c))) continue;
      for (Index r = 0; r < size; ++r)
        if (s_.compact.in_core(g, g.point(r))) sup = std::max(sup, std::abs(diff.values(r, c)));
    }
    out.sup_err = sup;

    const WaveFunction diff_fn = kernel_as_function(diff);
    NormSpec fl{NormFlavor::localized_fourier_lebesgue, 1.0, 1.0, 0.0, {}, s_.compact};
    out.fl1_err = mod_norm(diff_fn, fl, window2_);

    if (s_.kernel_norm) {
      SampledKernel flat = e;
      if (!exceptional_) flat.values = flat.values.cwiseProduct(flatten_);
      NormSpec mi{NormFlavor::modulation, kInf, 1.0, 0.0, lattice2_, s_.compact};
      out.minfty1_norm = mod_norm(kernel_as_function(flat), mi, window2_);
    } else {
      out.minfty1_norm = std::nan("");
    }

    for (const auto& a : atoms_) out.atom_gaps.push_back(std::abs(weakstar_pairing(diff, a)));
    out.weakstar_max_gap = *std::max_element(out.atom_gaps.begin(), out.atom_gaps.end());

    NormSpec m1{NormFlavor::modulation, 1.0, 1.0, 0.0, {}, s_.compact};
    for (const auto& phi : slice_atoms_) {
      const WaveFunction sl = kernel_slice(diff, phi, rows_slice);
      out.m1_slice_err = std::max(out.m1_slice_err, mod_norm(sl, m1, window_));
      out.l1_slice_err = std::max(out.l1_slice_err, grid_lp(sl, 1.0));
      out.l2_slice_err = std::max(out.l2_slice_err, grid_lp(sl, 2.0));
      out.linf_slice_err = std::max(out.linf_slice_err, grid_lp(sl, kInf));
    }

    const WaveFunction probe = standard_gaussian(g);
    out.boundary_mass = boundary_mass(WaveFunction{g, e.as_operator() * probe.values});

    if (reflection_) {
      Eigen::VectorXd c = Eigen::VectorXd::Ones(1);
      const WaveFunction asym = gaussian(g, 1.0, c, Eigen::VectorXd::Zero(1));
      const WaveFunction target = sample(g, [&](const Eigen::VectorXd& x) {
        return reflection_->c_prime * std::pow(2.0, 0.25) * std::exp(-kPi * std::pow(reflection_->parity * x[0] - 1.0, 2));
      });
      const WaveFunction got{g, e.as_operator() * asym.values};
      WaveFunction d{g, got.values - target.values};
      out.reflection_residual = l2_norm(d);
    }
    out.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  }

  void fill_windows(ConvergenceReport& r) const {
    std::ostringstream cw;
    cw << "compact bump: 1 on |x|,|y| <= " << fmt(s_.compact.inner_fraction * s_.grid.half_width()) << ", 0 beyond "
       << fmt(s_.compact.outer_fraction * s_.grid.half_width());
    std::ostringstream gw;
    gw << "gaussian width " << fmt(s_.window_width) << ", stride " << lattice2_.stride << ", patch " << lattice2_.patch;
    r.metric_windows = {{"sup_err", "nodes with |x|,|y| <= " + fmt(s_.compact.inner_fraction * s_.grid.half_width())},
                        {"fl1_err", cw.str()},
                        {"minfty1_norm", s_.kernel_norm ? gw.str() : "not computed"},
                        {"weakstar_max_gap", std::to_string(atoms_.size()) + " atoms pi(z1)g x pi(z2)g, |z| <= " +
                                                 fmt(s_.atom_radius) + ", seed " + std::to_string(s_.seed)},
                        {"m1_slice_err", "gaussian width " + fmt(s_.window_width) + ", full lattice; slice atoms g, "
                                         "pi(1,0)g, pi(0,1)g"},
                        {"boundary_mass", "image of the standard gaussian, shell |x| >= 0.9 L"}};
    r.reference_band_mass = band_mass_;
    r.flattened = !exceptional_;
  }

  std::vector<ConvergenceRow> rows(const std::vector<int>& schedule, bool rows_slice = true) const {
    std::vector<ConvergenceRow> out(schedule.size());
    parallel_for(Index(schedule.size()), [&](Index b, Index e) {
      for (Index i = b; i < e; ++i) out[std::size_t(i)] = row(schedule[std::size_t(i)], rows_slice);
    });
    return out;
  }

 private:
  const StudySetup& s_;
  double t_;
  TrotterPropagator trotter_;
  SpectralPropagator reference_;
  Window window_;
  Window window2_;
  StftLattice lattice2_;
  std::vector<KernelAtom> atoms_;
  std::vector<Eigen::VectorXcd> slice_atoms_;
  SampledKernel u_;
  Eigen::MatrixXcd flatten_;
  bool exceptional_ = false;
  double band_mass_ = 0.0;
  std::optional<ReflectionDescriptor> reflection_;
};

std::vector<double> column(const std::vector<ConvergenceRow>& rows, double ConvergenceRow::*field) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.*field);
  return v;
}

Check boundary_check(const ConvergenceReport& r) {
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.boundary_mass);
  return {"boundary_mass", worst <= kBoundaryMassLimit, "max " + fmt(worst) + " (limit " + fmt(kBoundaryMassLimit) + ")"};
}

Check monotone_check(const std::string& name, const std::vector<double>& v, const StudyBounds& b) {
  return {name, tail_monotone(v, b.tail, b.error_floor), "tail values [" + join(v) + "]"};
}

}  // namespace

std::vector<KernelAtom> atom_battery(const StudySetup& s) {
  if (s.atom_count < 1) throw std::invalid_argument("atom battery needs at least one atom");
  const double step = 0.5;
  const int lim = int(std::floor(s.atom_radius / step + 1e-12));
  std::vector<std::array<int, 4>> pool;
  for (int a = -lim; a <= lim; ++a)
    for (int b = -lim; b <= lim; ++b)
      for (int c = -lim; c <= lim; ++c)
        for (int d = -lim; d <= lim; ++d)
          if (step * step * (a * a + b * b + c * c + d * d) <= s.atom_radius * s.atom_radius + 1e-12 &&
              (a | b | c | d) != 0)
            pool.push_back({a, b, c, d});
  std::mt19937_64 rng(s.seed);
  std::vector<std::array<int, 4>> chosen{{0, 0, 0, 0}};
  // Partial Fisher-Yates with raw engine output keeps the draw identical across standard libraries.
  for (std::size_t i = 0; chosen.size() < std::size_t(s.atom_count) && i < pool.size(); ++i) {
    const std::size_t j = i + std::size_t(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
    chosen.push_back(pool[i]);
  }
  std::vector<KernelAtom> out;
  for (const auto& z : chosen) {
    KernelAtom a;
    a.x0 = Eigen::VectorXd::Constant(1, step * z[0]);
    a.xi0 = Eigen::VectorXd::Constant(1, step * z[1]);
    a.y0 = Eigen::VectorXd::Constant(1, step * z[2]);
    a.eta0 = Eigen::VectorXd::Constant(1, step * z[3]);
    a.width = s.window_width;
    out.push_back(a);
  }
  return out;
}

WaveFunction kernel_slice(const SampledKernel& k, const Eigen::VectorXcd& phi, bool rows) {
  const double cell = k.grid.cell();
  if (rows) return WaveFunction{k.grid, cell * (k.values * phi.conjugate())};
  return WaveFunction{k.grid, cell * (k.values.transpose() * phi.conjugate())};
}

bool ConvergenceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ConvergenceReport::csv() const {
  std::ostringstream os;
  os << "n,sup_err,fl1_err,minfty1_norm,weakstar_max_gap,m1_slice_err,boundary_mass\n";
  for (const auto& r : rows)
    os << r.n << ',' << fmt(r.sup_err) << ',' << fmt(r.fl1_err) << ',' << fmt(r.minfty1_norm) << ','
       << fmt(r.weakstar_max_gap) << ',' << fmt(r.m1_slice_err) << ',' << fmt(r.boundary_mass) << '\n';
  return os.str();
}

namespace {
nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json bounds_json(const StudyBounds& b) {
  return {{"ratio_band", {b.ratio_low, b.ratio_high}}, {"overall_decay", b.overall_decay},
          {"norm_band", b.norm_band},                  {"weakstar_decay", b.weakstar_decay},
          {"sup_stagnation", b.sup_stagnation},        {"amplitude_tolerance", b.amplitude_tolerance},
          {"error_floor", b.error_floor},              {"tail", b.tail}};
}

nlohmann::json checks_json(const std::vector<Check>& checks) {
  auto arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return arr;
}
}  // namespace

std::string ConvergenceReport::json_lines() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["study"] = study;
    j["scenario"] = scenario_id;
    j["t"] = t;
    j["n"] = r.n;
    j["steps_used"] = r.steps_used;
    j["sup_err"] = num(r.sup_err);
    j["fl1_err"] = num(r.fl1_err);
    j["minfty1_norm"] = num(r.minfty1_norm);
    j["weakstar_max_gap"] = num(r.weakstar_max_gap);
    j["m1_slice_err"] = num(r.m1_slice_err);
    j["l1_slice_err"] = num(r.l1_slice_err);
    j["l2_slice_err"] = num(r.l2_slice_err);
    j["linf_slice_err"] = num(r.linf_slice_err);
    j["boundary_mass"] = num(r.boundary_mass);
    if (r.reflection_residual >= 0.0) j["reflection_residual"] = r.reflection_residual;
    j["atom_gaps"] = r.atom_gaps;
    j["wall_seconds"] = r.wall_seconds;
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json s;
  s["study"] = study;
  s["scenario"] = scenario_id;
  s["t"] = t;
  s["schedule"] = schedule;
  s["passed"] = passed();
  s["checks"] = checks_json(checks);
  s["bounds"] = bounds_json(bounds);
  auto w = nlohmann::json::object();
  for (const auto& [k, v] : metric_windows) w[k] = v;
  s["windows"] = w;
  s["reference_band_mass"] = reference_band_mass;
  s["phase_flattened"] = flattened;
  os << s.dump() << '\n';
  return os.str();
}

ConvergenceReport converge_study(const StudySetup& s, double t, const std::vector<int>& schedule, StudyBounds b) {
  validate_schedule(schedule);
  const SymplecticFlow flow = flow_at(s.hamiltonian, t);
  if (flow.near_exceptional())
    throw ExceptionalTimeError("t is exceptional; use the weak-* study (det B_t = " + fmt(flow.det_b()) + ")", t,
                               flow.det_b());
  KernelStudy ks(s, t);
  ConvergenceReport r;
  r.study = "converge";
  r.scenario_id = s.id;
  r.t = t;
  r.schedule = schedule;
  r.bounds = b;
  r.rows = ks.rows(schedule);
  ks.fill_windows(r);

  const auto sup = column(r.rows, &ConvergenceRow::sup_err);
  r.checks.push_back(monotone_check("sup_tail_monotone", sup, b));

  std::ostringstream ratios;
  bool band_ok = true;
  for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) {
    if (r.rows[i + 1].n != 2 * r.rows[i].n || sup[i] <= b.error_floor) continue;
    const double q = sup[i + 1] / sup[i];
    ratios << (ratios.tellp() > 0 ? ", " : "") << r.rows[i].n << "->" << r.rows[i + 1].n << ": " << fmt(q);
    if (q < b.ratio_low || q > b.ratio_high) band_ok = false;
  }
  r.checks.push_back({"sup_ratio_band", band_ok, ratios.str()});

  const bool trivial = sup.front() <= b.error_floor;
  const double overall = trivial ? 0.0 : sup.back() / sup.front();
  r.checks.push_back({"sup_overall_decay", trivial || overall < b.overall_decay,
                      "E(last)/E(first) = " + fmt(overall) + " (bound " + fmt(b.overall_decay) + ")"});

  r.checks.push_back(monotone_check("fl1_tail_monotone", column(r.rows, &ConvergenceRow::fl1_err), b));

  if (s.kernel_norm) {
    const auto norms = column(r.rows, &ConvergenceRow::minfty1_norm);
    const double mx = *std::max_element(norms.begin(), norms.end());
    const double mn = *std::min_element(norms.begin(), norms.end());
    r.checks.push_back({"minfty1_bounded", mn > 0.0 && mx / mn <= b.norm_band,
                        "max/min = " + fmt(mn > 0.0 ? mx / mn : kInf) + " (bound " + fmt(b.norm_band) + ")"});
  }
  r.checks.push_back(boundary_check(r));
  return r;
}

ConvergenceReport weakstar_study(const StudySetup& s, double t, const std::vector<int>& schedule, StudyBounds b) {
  validate_schedule(schedule);
  const SymplecticFlow flow = flow_at(s.hamiltonian, t);
  if (!flow.near_exceptional())
    throw ExceptionalTimeError("t is not exceptional; use the convergence study (det B_t = " + fmt(flow.det_b()) + ")",
                               t, flow.det_b());
  KernelStudy ks(s, t);
  ConvergenceReport r;
  r.study = "weakstar";
  r.scenario_id = s.id;
  r.t = t;
  r.schedule = schedule;
  r.bounds = b;
  r.rows = ks.rows(schedule);
  ks.fill_windows(r);

  const auto& first = r.rows.front().atom_gaps;
  const auto& last = r.rows.back().atom_gaps;
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] <= b.error_floor) {
      if (last[i] > b.error_floor) ok = false;
      continue;
    }
    const double q = last[i] / first[i];
    worst = std::max(worst, q);
    if (!(q < b.weakstar_decay)) ok = false;
  }
  r.checks.push_back({"atom_gaps_decay", ok,
                      "worst gap ratio last/first = " + fmt(worst) + " (bound " + fmt(b.weakstar_decay) + ")"});

  const double s0 = r.rows.front().sup_err, s1 = r.rows.back().sup_err;
  if (s0 <= b.error_floor) {
    r.checks.push_back({"sup_stagnates", true, "reference reproduced exactly (sup error " + fmt(s0) + ")"});
  } else {
    r.checks.push_back({"sup_stagnates", s1 > b.sup_stagnation * s0,
                        "E(last)/E(first) = " + fmt(s1 / s0) + " (must exceed " + fmt(b.sup_stagnation) + ")"});
  }
  r.checks.push_back(boundary_check(r));
  return r;
}

ConvergenceReport m1_slice_study(const StudySetup& s, double t, const std::vector<int>& schedule, StudyBounds b) {
  validate_schedule(schedule);
  KernelStudy ks(s, t);
  ConvergenceReport r;
  r.study = "m1slice";
  r.scenario_id = s.id;
  r.t = t;
  r.schedule = schedule;
  r.bounds = b;
  r.rows = ks.rows(schedule);
  ks.fill_windows(r);
  r.checks.push_back(monotone_check("m1_tail_monotone", column(r.rows, &ConvergenceRow::m1_slice_err), b));
  r.checks.push_back(monotone_check("l1_tail_monotone", column(r.rows, &ConvergenceRow::l1_slice_err), b));
  r.checks.push_back(monotone_check("l2_tail_monotone", column(r.rows, &ConvergenceRow::l2_slice_err), b));
  r.checks.push_back(monotone_check("linf_tail_monotone", column(r.rows, &ConvergenceRow::linf_slice_err), b));
  r.checks.push_back(boundary_check(r));
  return r;
}

IndicatorBall indicator_ball(const Grid& grid, const Eigen::VectorXd& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  IndicatorBall b;
  b.values = Eigen::VectorXcd::Zero(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    if ((grid.point(i) - center).norm() <= radius * (1.0 + 1e-12)) {
      b.values[i] = 1.0;
      ++b.cells;
    }
  if (b.cells == 0) throw ResolutionError("ball contains no grid node");
  const double measure = double(b.cells) * grid.cell();
  b.values /= std::sqrt(measure);
  b.effective_radius = grid.dim() == 1 ? 0.5 * measure : std::sqrt(measure / kPi);
  return b;
}

cplx transition_amplitude(const SpectralPropagator& u, double t, const IndicatorBall& a, const IndicatorBall& b) {
  const Eigen::VectorXcd ua = u.apply(t, a.values);
  return u.grid().cell() * b.values.dot(ua);  // dot conjugates the first argument: sum conj(B) (U A)
}

bool AmplitudeStudy::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string AmplitudeStudy::csv() const {
  std::ostringstream os;
  os << "a,b,a_eff,b_eff,re_I,im_I,abs_I,rescaled\n";
  for (const auto& r : rows)
    os << fmt(r.a) << ',' << fmt(r.b) << ',' << fmt(r.a_eff) << ',' << fmt(r.b_eff) << ',' << fmt(r.amplitude.real())
       << ',' << fmt(r.amplitude.imag()) << ',' << fmt(std::abs(r.amplitude)) << ',' << fmt(r.rescaled) << '\n';
  return os.str();
}

std::string AmplitudeStudy::json_lines() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["study"] = "amplitude";
    j["t"] = t;
    j["a"] = r.a;
    j["b"] = r.b;
    j["a_eff"] = r.a_eff;
    j["b_eff"] = r.b_eff;
    j["I"] = {r.amplitude.real(), r.amplitude.imag()};
    j["abs_I"] = std::abs(r.amplitude);
    j["rescaled"] = r.rescaled;
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json s;
  s["study"] = "amplitude";
  s["t"] = t;
  s["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());
  s["y0"] = std::vector<double>(y0.data(), y0.data() + y0.size());
  s["C"] = c_dim;
  s["extrapolated"] = extrapolated;
  s["reference"] = reference;
  s["reference_source"] = reference_source;
  s["relative_error"] = relative_error;
  s["phase_ratio"] = {phase_ratio.real(), phase_ratio.imag()};
  s["passed"] = passed();
  s["checks"] = checks_json(checks);
  s["bounds"] = bounds_json(bounds);
  os << s.dump() << '\n';
  return os.str();
}

AmplitudeStudy amplitude_study(const StudySetup& s, double t, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0,
                               const std::vector<double>& radii, StudyBounds b) {
  const int d = s.grid.dim();
  if (x0.size() != d || y0.size() != d) throw std::invalid_argument("amplitude: point dimension mismatch");
  if (radii.size() < 2) throw std::invalid_argument("amplitude: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i && radii[i] >= radii[i - 1]))
      throw std::invalid_argument("amplitude: radii must be positive and strictly decreasing");
  const SymplecticFlow flow = flow_at(s.hamiltonian, t);
  if (flow.near_exceptional())
    throw ExceptionalTimeError("amplitude limit requires a non-exceptional t (det B_t = " + fmt(flow.det_b()) + ")", t,
                               flow.det_b());
  if (radii.back() < 8.0 * s.grid.spacing())
    throw ResolutionError("smallest ball is resolved by fewer than 8 grid cells");

  const SpectralPropagator u(s.hamiltonian, s.grid, true);
  AmplitudeStudy st;
  st.t = t;
  st.x0 = x0;
  st.y0 = y0;
  st.dim = d;
  st.c_dim = d == 1 ? 2.0 : kPi;
  st.bounds = b;
  for (double a : radii) {
    const IndicatorBall ba = indicator_ball(s.grid, y0, a);
    const IndicatorBall bb = indicator_ball(s.grid, x0, a);
    AmplitudeRow row;
    row.a = row.b = a;
    row.a_eff = ba.effective_radius;
    row.b_eff = bb.effective_radius;
    row.amplitude = transition_amplitude(u, t, ba, bb);
    row.rescaled = std::abs(row.amplitude) / std::pow(row.a_eff * row.b_eff, 0.5 * d);
    st.rows.push_back(row);
  }
  // Richardson on the two smallest radii under r(a) = c0 + c1 a.
  const auto& r1 = st.rows[st.rows.size() - 2];
  const auto& r2 = st.rows.back();
  st.extrapolated = (r1.a_eff * r2.rescaled - r2.a_eff * r1.rescaled) / (r1.a_eff - r2.a_eff);

  const MetaplecticKernelSpec ms = metaplectic_spec(s.hamiltonian, t);
  if (s.hamiltonian.potential.is_zero()) {
    st.reference = st.c_dim * ms.amplitude;
    st.reference_source = "metaplectic modulus |det B_t|^{-1/2}";
    const SampledKernel k = metaplectic_kernel(s.hamiltonian, t, s.grid, &u);
    const cplx ut = k.phase * ms.amplitude * std::exp(cplx(0.0, kTwoPi * phase_phi(ms, x0, y0)));
    st.phase_ratio = r2.amplitude / (st.c_dim * ut) / std::abs(r2.amplitude / (st.c_dim * ut));
  } else {
    // With a potential the grid kernel is used; it is band-limited and therefore approximate pointwise.
    const SampledKernel k = u.kernel(t);
    Index ix = 0, iy = 0;
    double bx = kInf, by = kInf;
    for (Index i = 0; i < s.grid.size(); ++i) {
      const double dx = (s.grid.point(i) - x0).norm(), dy = (s.grid.point(i) - y0).norm();
      if (dx < bx) { bx = dx; ix = i; }
      if (dy < by) { by = dy; iy = i; }
    }
    st.reference = st.c_dim * std::abs(k.values(ix, iy));
    st.reference_source = "grid eigensolver kernel at the nearest nodes";
  }
  st.relative_error = std::abs(st.extrapolated - st.reference) / st.reference;
  st.checks.push_back({"limit_within_tolerance", st.relative_error <= b.amplitude_tolerance,
                       "relative error " + fmt(st.relative_error) + " (bound " + fmt(b.amplitude_tolerance) + ")"});
  double worst = 0.0;
  for (const auto& row : st.rows) worst = std::max(worst, std::abs(row.amplitude));
  st.checks.push_back({"unitarity_bound", worst <= 1.0 + 1e-10, "max |I| = " + fmt(worst)});
  return st;
}

}  // namespace ftlab
