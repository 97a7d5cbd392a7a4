#include "ftlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "ftlab/io.hpp"
#include "ftlab/scenario.hpp"

namespace ftlab {

namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> times;  // overrides the config time list
};

std::string json_matrix(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (Index r = 0; r < m.rows(); ++r) {
    s += r ? ",[" : "[";
    for (Index c = 0; c < m.cols(); ++c) s += (c ? "," : "") + format_double(m(r, c));
    s += "]";
  }
  return s + "]";
}

class Session {
 public:
  explicit Session(const Globals& g) {
    cfg_ = g.config.empty() ? parse_config("", true) : load_config(g.config, true);
    if (!g.out.empty()) cfg_.output = g.out;
    if (g.seed) cfg_.seed = *g.seed;
    if (!g.times.empty()) cfg_.times = g.times;
    if (g.threads > 0) set_thread_count(g.threads);
  }

  const ScenarioConfig& config() const { return cfg_; }

  fs::path path(const std::string& name) const {
    fs::create_directories(cfg_.output);
    return fs::path(cfg_.output) / name;
  }

  std::string tag(std::size_t i) const { return cfg_.id + "_t" + std::to_string(i); }

 private:
  ScenarioConfig cfg_;
};

int cmd_flow(const Session& s) {
  const auto h = s.config().hamiltonian();
  std::string json;
  std::printf("%-24s %-24s %-10s %s\n", "t", "det_B_t", "residual", "exceptional");
  for (double t : s.config().times) {
    const SymplecticFlow f = flow_at(h, t);
    const double res = symplectic_residual(f.matrix);
    const bool exc = f.near_exceptional();
    std::printf("%-24s %-24s %-10.2e %s\n", format_double(t).c_str(), format_double(f.det_b()).c_str(), res,
                exc ? "yes" : "no");
    json += "{\"t\":" + format_double(t) + ",\"A_t\":" + json_matrix(f.A()) + ",\"B_t\":" + json_matrix(f.B()) +
            ",\"C_t\":" + json_matrix(f.C()) + ",\"D_t\":" + json_matrix(f.D()) + ",\"det_B_t\":" +
            format_double(f.det_b()) + ",\"symplectic_residual\":" + format_double(res) +
            ",\"exceptional\":" + (exc ? "true" : "false") + "}\n";
  }
  atomic_write(s.path(s.config().id + "_flow.jsonl"), json);
  std::cout << json;
  return kExitOk;
}

int cmd_exceptional(const Session& s) {
  const auto& c = s.config();
  const ExceptionalTimeSet set = exceptional_times(c.hamiltonian(), c.scan_min, c.scan_max, c.scan_step);
  std::string json = "{\"interval\":[" + format_double(c.scan_min) + "," + format_double(c.scan_max) +
                     "],\"degenerate\":" + (set.whole_line ? "true" : "false") + ",\"roots\":[";
  for (std::size_t i = 0; i < set.roots.size(); ++i)
    json += std::string(i ? "," : "") + "{\"t\":" + format_double(set.roots[i].t) + ",\"kind\":\"" +
            (set.roots[i].kind == ExceptionalRoot::Kind::tangential ? "tangential" : "sign_change") + "\"}";
  json += "],\"unresolved\":[";
  for (std::size_t i = 0; i < set.unresolved.size(); ++i)
    json += std::string(i ? "," : "") + "[" + format_double(set.unresolved[i].first) + "," +
            format_double(set.unresolved[i].second) + "]";
  json += "]}\n";
  atomic_write(s.path(c.id + "_exceptional.json"), json);
  std::cout << json;
  return set.resolved() ? kExitOk : kExitUnresolved;
}

int cmd_kernel(const Session& s, const std::string& provenance_flag, int steps_flag) {
  const auto& c = s.config();
  const std::string prov = provenance_flag.empty() ? c.provenance : provenance_flag;
  const int steps = steps_flag > 0 ? steps_flag : c.steps;
  const auto h = c.hamiltonian();
  const Grid grid = c.grid();
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const double t = c.times[i];
    const fs::path stem = s.path(s.tag(i) + "_" + prov);
    SampledKernel k;
    if (prov == "eigensolver") {
      k = eigensolver_reference(h, t, grid);
    } else if (prov == "metaplectic") {
      k = metaplectic_kernel(h, t, grid);
    } else if (prov == "trotter") {
      TrotterOptions o;
      o.free_step = c.free_step == "spectral" ? FreeStep::spectral : FreeStep::sampled_metaplectic;
      o.placement = c.placement == "start" ? Placement::start : Placement::end;
      k = trotter_propagator(h, t, steps, grid, o);
    } else if (prov == "mehler") {
      const MehlerResult m = mehler_kernel(t, grid);
      if (const auto* r = std::get_if<ReflectionDescriptor>(&m)) {
        const std::string json =
            "{\"d\":" + std::to_string(grid.dim()) + ",\"N\":" + std::to_string(grid.points()) +
            ",\"L\":" + format_double(grid.half_width()) + ",\"t\":" + format_double(t) +
            ",\"provenance\":\"mehler\",\"kernel\":\"reflection\",\"k\":" + std::to_string(r->k) +
            ",\"parity\":" + std::to_string(r->parity) + ",\"c_prime\":[" + format_double(r->c_prime.real()) + "," +
            format_double(r->c_prime.imag()) + "],\"phase_deviation\":" + format_double(r->deviation) + "}\n";
        atomic_write(stem.string() + ".json", json);
        std::cerr << "t = " << format_double(t)
                  << " is exceptional: symbolic descriptor written to sidecar only (" << stem.string() << ".json)\n";
        return kExitExceptional;
      }
      k = std::get<SampledKernel>(m);
    } else {
      throw std::invalid_argument("unknown provenance '" + prov + "'");
    }
    const KernelSidecar sc = write_kernel_dump(stem, k, h);
    std::cout << stem.string() << ".bin " << sc.checksum << "\n";
  }
  return kExitOk;
}

void print_checks(const std::vector<Check>& checks) {
  for (const auto& ch : checks)
    std::cout << (ch.passed ? "ok    " : "FAILED") << " " << ch.name << (ch.detail.empty() ? "" : ": " + ch.detail)
              << "\n";
}

template <class Study>
int cmd_study(const Session& s, const std::string& name, Study study) {
  const auto& c = s.config();
  const StudySetup setup = c.setup();
  bool ok = true;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const ConvergenceReport r = study(setup, c.times[i], c.schedule, StudyBounds{});
    const std::string stem = s.tag(i) + "_" + name;
    atomic_write(s.path(stem + ".csv"), r.csv());
    atomic_write(s.path(stem + ".jsonl"), r.json_lines());
    std::cout << name << " t = " << format_double(c.times[i]) << "\n" << r.csv();
    print_checks(r.checks);
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitCheck;
}

int cmd_amplitude(const Session& s) {
  const auto& c = s.config();
  const StudySetup setup = c.setup();
  const auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), Index(v.size())));
  };
  bool ok = true;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const AmplitudeStudy a = amplitude_study(setup, c.times[i], vec(c.amp_x0), vec(c.amp_y0), c.radii);
    const std::string stem = s.tag(i) + "_amplitude";
    atomic_write(s.path(stem + ".csv"), a.csv());
    atomic_write(s.path(stem + ".jsonl"), a.json_lines());
    std::cout << "amplitude t = " << format_double(c.times[i]) << "\n" << a.csv();
    print_checks(a.checks);
    ok = ok && a.passed();
  }
  return ok ? kExitOk : kExitCheck;
}

// Time-frequency norms of the sampled kernel for each configured time (d = 1).
int cmd_stft_report(const Session& s) {
  const auto& c = s.config();
  const auto h = c.hamiltonian();
  const Grid grid = c.grid();
  if (grid.dim() != 1) throw std::invalid_argument("stft-report is implemented for d = 1");
  std::string csv = "t,provenance,sup,fl1_local,m11_norm,minfty1_norm\n";
  for (double t : c.times) {
    const SampledKernel k = eigensolver_reference(h, t, grid);
    const WaveFunction kf = kernel_as_function(k);
    const Window g = gaussian_window(kf.grid, c.window_width);
    NormSpec fl;
    fl.flavor = NormFlavor::localized_fourier_lebesgue;
    fl.window.inner_fraction = c.compact_fraction;
    NormSpec m11;
    m11.lattice = kernel_lattice(grid, c.window_width);
    NormSpec minf = m11;
    minf.p = kInf;
    const double sup = kf.values.cwiseAbs().maxCoeff();
    csv += format_double(t) + ",eigensolver," + format_double(sup) + "," + format_double(mod_norm(kf, fl, g)) + "," +
           format_double(mod_norm(kf, m11, g)) + "," + format_double(mod_norm(kf, minf, g)) + "\n";
  }
  atomic_write(s.path(c.id + "_stft_report.csv"), csv);
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"ftlab: metaplectic propagators, Trotter products and time-frequency diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "scenario file")->envname("FTL_CONFIG");
  app.add_option("--out", g.out, "output directory")->envname("FTL_OUT");
  app.add_option("--threads", g.threads, "worker threads")->envname("FTL_THREADS")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "random seed")->envname("FTL_SEED");
  app.add_option("--t", g.times, "times (override the config list)")->delimiter(',');

  auto* flow = app.add_subcommand("flow", "classical flow blocks, det B_t and symplecticity residual");
  auto* exc = app.add_subcommand("exceptional", "exceptional times on the configured interval");
  auto* kernel = app.add_subcommand("kernel", "dump a sampled kernel and its sidecar");
  std::string provenance;
  int steps = 0;
  kernel->add_option("--provenance", provenance, "metaplectic | mehler | eigensolver | trotter")
      ->check(CLI::IsMember({"metaplectic", "mehler", "eigensolver", "trotter"}));
  kernel->add_option("--steps", steps, "Trotter step count");
  auto* converge = app.add_subcommand("converge", "Trotter convergence at a non-exceptional time");
  auto* weakstar = app.add_subcommand("weakstar", "weak-* convergence at an exceptional time");
  auto* m1slice = app.add_subcommand("m1slice", "M^1 convergence of kernel slices");
  auto* amplitude = app.add_subcommand("amplitude", "transition amplitude between shrinking balls");
  auto* stft_report = app.add_subcommand("stft-report", "time-frequency norms of the sampled kernel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    const Session s(g);
    if (*flow) return cmd_flow(s);
    if (*exc) return cmd_exceptional(s);
    if (*kernel) return cmd_kernel(s, provenance, steps);
    if (*converge) return cmd_study(s, "converge", converge_study);
    if (*weakstar) return cmd_study(s, "weakstar", weakstar_study);
    if (*m1slice) return cmd_study(s, "m1slice", m1_slice_study);
    if (*amplitude) return cmd_amplitude(s);
    if (*stft_report) return cmd_stft_report(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ExceptionalTimeError& e) {
    std::cerr << "exceptional time refused: " << e.what() << " (t = " << format_double(e.time())
              << ", |det B_t| = " << format_double(std::abs(e.determinant())) << ")\n";
    return kExitExceptional;
  } catch (const UnresolvedError& e) {
    std::cerr << "unresolved: " << e.what() << "\n";
    return kExitUnresolved;
  } catch (const ResolutionError& e) {
    std::cerr << "unresolved: " << e.what() << "\n";
    return kExitUnresolved;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const GridMismatchError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}

}  // namespace ftlab
