// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero when any
// selected criterion fails.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ftlab/experiments.hpp"
#include "ftlab/io.hpp"

using namespace ftlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string(ok ? "" : "[fail] ") + what;
  }
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

QuadraticHamiltonian harmonic_cosine() {
  QuadraticHamiltonian h = harmonic_oscillator(1);
  h.potential = Potential::cosine(1.0, v1(1.0));
  return h;
}

const std::vector<int> kSchedule{8, 16, 32, 64, 128};

const Check* find(const std::vector<Check>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.name == name) return &c;
  return nullptr;
}

void require_check(Outcome& o, const std::vector<Check>& cs, const std::string& name, const std::string& label) {
  const Check* c = find(cs, name);
  if (!c) {
    o.require(false, label + ": check " + name + " missing");
    return;
  }
  o.require(c->passed, label + " " + c->detail);
}

// 1. Rotation flow of the harmonic oscillator.
Outcome c1() {
  Outcome o;
  const auto h = harmonic_oscillator(1);
  double err = 0.0, res = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = -10.0 + 20.0 * i / 999.0;
    const SymplecticFlow f = flow_at(h, t);
    Eigen::Matrix2d r;
    r << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    err = std::max(err, (f.matrix - r).cwiseAbs().maxCoeff());
    res = std::max(res, symplectic_residual(f.matrix));
  }
  o.require(err <= 1e-10, "max entry error " + fmt(err));
  o.require(res <= 1e-10, "symplectic residual " + fmt(res));
  return o;
}

// 2. Exceptional sets.
Outcome c2() {
  Outcome o;
  const ExceptionalTimeSet ho = exceptional_times(harmonic_oscillator(1), -10.0, 10.0, 0.01);
  double err = ho.roots.size() == 7 ? 0.0 : kInf;
  for (std::size_t i = 0; i < ho.roots.size() && ho.roots.size() == 7; ++i)
    err = std::max(err, std::abs(ho.roots[i].t - (double(i) - 3.0) * kPi));
  o.require(ho.resolved() && err <= 1e-8, "harmonic: " + std::to_string(ho.roots.size()) + " roots, max |t - k pi| " + fmt(err));
  const ExceptionalTimeSet fr = exceptional_times(free_particle(1), -5.0, 5.0, 0.01);
  o.require(fr.roots.size() == 1 && fr.roots[0].t == 0.0 && !fr.whole_line, "free: {0}");
  QuadraticHamiltonian zero;
  zero.A = zero.B = zero.C = Eigen::MatrixXd::Zero(1, 1);
  o.require(exceptional_times(zero, -5.0, 5.0, 0.01).whole_line, "H = 0: whole-line marker");
  return o;
}

// 3. Free kernel closed form, c_t calibrated.
Outcome c3() {
  Outcome o;
  const Grid g(1, 512, 16.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const SampledKernel k = metaplectic_kernel(free_particle(1), t, g);
    const cplx pref = std::pow(cplx(0.0, kTwoPi * t), -0.5);
    double err = 0.0;
    for (int i = 0; i < 512; ++i)
      for (int j = 0; j < 512; ++j) {
        const double d = g.node(i) - g.node(j);
        err = std::max(err, std::abs(k.values(i, j) - pref * std::exp(cplx(0.0, d * d / (2.0 * t)))));
      }
    o.require(err <= 1e-9, "t = " + fmt(t) + " entrywise " + fmt(err));
  }
  return o;
}

// 4. Mehler kernel against the eigensolver oracle on the compact window.
Outcome c4() {
  Outcome o;
  const Grid g(1, 256, 12.0);
  const CompactWindow w{};
  for (double t : {kPi / 4, kPi / 2, 3 * kPi / 4}) {
    const auto m = std::get<SampledKernel>(mehler_kernel(t, g));
    const SampledKernel e = eigensolver_reference(harmonic_oscillator(1), t, g);
    double err = 0.0;
    for (int i = 0; i < 256; ++i) {
      if (!w.in_core(g, v1(g.node(i)))) continue;
      for (int j = 0; j < 256; ++j)
        if (w.in_core(g, v1(g.node(j)))) err = std::max(err, std::abs(m.values(i, j) - e.values(i, j)));
    }
    const double mod = (m.values.cwiseAbs().array() - std::pow(std::abs(std::sin(t)), -0.5)).abs().maxCoeff();
    o.require(err <= 1e-5, "t = " + fmt(t) + " sup on compact " + fmt(err));
    o.require(mod <= 1e-8, "t = " + fmt(t) + " | |K| - |sin t|^-1/2 | " + fmt(mod));
  }
  return o;
}

// 5. Trotter collapses to the exact propagator when V = 0.
Outcome c5() {
  Outcome o;
  const Grid g(1, 256, 12.0);
  const auto h = harmonic_oscillator(1);
  const SampledKernel ref = eigensolver_reference(h, 1.0, g);
  double err = 0.0;
  for (int n : kSchedule) err = std::max(err, (trotter_propagator(h, 1.0, n, g).values - ref.values).cwiseAbs().maxCoeff());
  o.require(err <= 1e-10, "max |e_n - u| over schedule " + fmt(err));
  return o;
}

StudySetup standard_setup() {
  StudySetup s;
  s.id = "acceptance";
  s.hamiltonian = harmonic_cosine();
  s.grid = Grid(1, 256, 12.0);
  return s;
}

// 6. First-order convergence on the compact window at t = 1.
Outcome c6() {
  Outcome o;
  StudySetup s = standard_setup();
  s.kernel_norm = false;
  const ConvergenceReport r = converge_study(s, 1.0, kSchedule);
  require_check(o, r.checks, "sup_ratio_band", "E(2n)/E(n)");
  require_check(o, r.checks, "sup_overall_decay", "overall");
  require_check(o, r.checks, "fl1_tail_monotone", "FL1");
  return o;
}

// 7. Bounded Sjostrand-class norms of the flattened Trotter kernels.
Outcome c7() {
  Outcome o;
  const ConvergenceReport r = converge_study(standard_setup(), 1.0, kSchedule);
  require_check(o, r.checks, "minfty1_bounded", "M^{inf,1}");
  return o;
}

// 8. Weak-* convergence with sup-norm stagnation at t = pi.
Outcome c8() {
  Outcome o;
  StudySetup s = standard_setup();
  s.grid = Grid(1, 1024, 4.0);
  s.kernel_norm = false;
  const ConvergenceReport r = weakstar_study(s, kPi, kSchedule);
  require_check(o, r.checks, "atom_gaps_decay", "atoms");
  require_check(o, r.checks, "sup_stagnates", "sup");
  return o;
}

// 9. Slice convergence in M^1 and L^p at t = 1 and t = pi.
Outcome c9() {
  Outcome o;
  StudySetup s = standard_setup();
  s.kernel_norm = false;
  for (double t : {1.0, kPi}) {
    const ConvergenceReport r = m1_slice_study(s, t, kSchedule);
    for (const char* c : {"m1_tail_monotone", "l1_tail_monotone", "l2_tail_monotone", "linf_tail_monotone"})
      require_check(o, r.checks, c, "t = " + fmt(t) + " " + c);
  }
  return o;
}

// 10. Transition amplitude between shrinking balls.
Outcome c10() {
  Outcome o;
  StudySetup s;
  s.hamiltonian = free_particle(1);
  s.grid = Grid(1, 1024, 16.0);
  const AmplitudeStudy a = amplitude_study(s, 1.0, v1(1.0), v1(0.0), {1.0, 0.5, 0.25});
  const double target = 2.0 / std::sqrt(kTwoPi);
  const double rel = std::abs(a.extrapolated - target) / target;
  o.require(rel <= 0.05, "extrapolated " + fmt(a.extrapolated) + " vs " + fmt(target) + " (rel " + fmt(rel) + ")");
  double mx = 0.0;
  for (const auto& r : a.rows) mx = std::max(mx, std::abs(r.amplitude));
  o.require(mx <= 1.0, "max raw |I| " + fmt(mx));
  const SpectralPropagator u(s.hamiltonian, s.grid);
  const IndicatorBall b = indicator_ball(s.grid, v1(1.0), 0.5);
  const double d0 = std::abs(transition_amplitude(u, 0.0, b, b) - cplx(1.0));
  o.require(d0 <= 1e-6, "t = 0: |I - 1| " + fmt(d0));
  return o;
}

// 11. Time-slice quadrature against matrix-product Trotter entries. The two-slice integrand
// oscillates at up to (2L + |x| + |y|) / (2 pi tau) cycles per unit, so the grid must resolve it.
Outcome c11() {
  Outcome o;
  const Grid g(1, 1024, 12.0);
  QuadraticHamiltonian h = free_particle(1);
  h.potential = Potential::cosine(1.0, v1(1.0));
  TrotterOptions opts;
  opts.free_step = FreeStep::sampled_metaplectic;
  opts.placement = Placement::start;
  const double t = 1.0;
  std::mt19937_64 rng(2024);
  for (int n : {1, 2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const SampledKernel k = trotter_propagator(h, t, n, g, opts);
    double err = 0.0;
    for (int p = 0; p < 20; ++p) {
      const int i = 256 + int(rng() % 512), j = 256 + int(rng() % 512);
      const cplx q = timeslice_kernel_quadrature(h, t, n, g, g.node(i), g.node(j), opts.placement);
      err = std::max(err, std::abs(q - k.values(i, j)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(err <= 1e-5, "n = " + std::to_string(n) + " max entry gap " + fmt(err));
    o.require(secs <= 600.0, "n = " + std::to_string(n) + " runtime " + fmt(secs) + " s");
  }
  return o;
}

// 12. Time-frequency toolkit.
Outcome c12() {
  Outcome o;
  const Grid g(1, 256, 12.0);
  const Window w = gaussian_window(g);
  const WaveFunction f = sample(g, [](const Eigen::VectorXd& x) {
    return cplx(std::exp(-kPi * (x[0] - 1.0) * (x[0] - 1.0)) * std::cos(3.0 * x[0]), 0.5 * std::exp(-x[0] * x[0]));
  });
  NormSpec m22;
  m22.p = m22.q = 2.0;
  const double moyal = std::abs(mod_norm(f, m22, w) - l2_norm(f));
  o.require(moyal <= 1e-8 * l2_norm(f), "Moyal " + fmt(moyal));

  const STFTGram v = stft(w.sampled, w);
  const cplx v00 = v.values(g.points() / 2, v.values.cols() / 2);
  o.require(std::abs(v00 - cplx(1.0)) <= 1e-10, "V_gg(0,0) - 1 = " + fmt(std::abs(v00 - cplx(1.0))));

  const int n = g.points();
  const Eigen::MatrixXcd one = Eigen::MatrixXcd::Ones(n, n);
  const double id = (weyl_apply(one, f).values - f.values).cwiseAbs().maxCoeff();
  o.require(id <= 1e-8, "Weyl(1) - I " + fmt(id));

  const Grid gg(1, 256, 8.0);
  Eigen::MatrixXcd cosine(256, 256);
  for (int i = 0; i < 256; ++i) cosine.row(i).setConstant(std::cos(kTwoPi * gg.node(i)));
  const DecayReport d = almost_diag_gram(cosine, gg, gaussian_window(gg));
  o.require(d.fitted_s > 10.0, "Gram decay exponent s = " + fmt(d.fitted_s));
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> c = {
      {"flow exactness", c1},
      {"exceptional set", c2},
      {"free kernel identity", c3},
      {"Mehler cross-validation", c4},
      {"Trotter exactness at V = 0", c5},
      {"non-exceptional convergence", c6},
      {"norm boundedness", c7},
      {"exceptional-time dichotomy", c8},
      {"M1 slice convergence", c9},
      {"transition amplitude limit", c10},
      {"time-slice quadrature oracle", c11},
      {"time-frequency toolkit", c12},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) selected.push_back(std::atoi(argv[++i]));
    else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty())
    for (int i = 1; i <= int(criteria().size()); ++i) selected.push_back(i);

  bool all = true;
  for (int id : selected) {
    if (id < 1 || id > int(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& [name, fn] = criteria()[std::size_t(id - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("C%d %s: %s (%.1f s) %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
