#include "ftlab/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ftlab/io.hpp"

namespace ftlab {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};
using Table = std::map<std::string, std::map<std::string, Entry>>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"id"}},
      {"hamiltonian", {"preset", "dim", "A", "B", "C"}},
      {"potential", {"kind", "amplitude", "frequency", "center", "width", "weights", "frequencies"}},
      {"grid", {"dim", "points", "half_width"}},
      {"run",
       {"times", "schedule", "window_width", "compact_fraction", "seed", "output", "provenance", "steps",
        "free_step", "placement", "kernel_norm", "atoms", "atom_radius"}},
      {"exceptional", {"t_min", "t_max", "step"}},
      {"amplitude", {"x0", "y0", "radii"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string upper(std::string s) {
  for (char& c : s) c = char(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

class Reader {
 public:
  explicit Reader(const Table& t) : t_(t) {}

  const Entry* find(const std::string& sec, const std::string& key) const {
    auto s = t_.find(sec);
    if (s == t_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  [[noreturn]] void fail(const Entry& e, const std::string& sec, const std::string& key, const std::string& why) const {
    throw ConfigError("line " + std::to_string(e.line) + ": field " + sec + "." + key + ": " + why, e.line,
                      sec + "." + key);
  }

  double to_double(const Entry& e, const std::string& sec, const std::string& key, const std::string& tok) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      fail(e, sec, key, "expected a number, got '" + tok + "'");
    }
    if (pos != tok.size()) fail(e, sec, key, "trailing characters in '" + tok + "'");
    if (!std::isfinite(v)) fail(e, sec, key, "value must be finite");
    return v;
  }

  long long to_int(const Entry& e, const std::string& sec, const std::string& key, const std::string& tok) const {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      fail(e, sec, key, "expected an integer, got '" + tok + "'");
    }
    if (pos != tok.size()) fail(e, sec, key, "trailing characters in '" + tok + "'");
    return v;
  }

  void get(const std::string& sec, const std::string& key, double& out) const {
    if (const Entry* e = find(sec, key)) out = to_double(*e, sec, key, e->value);
  }
  void get(const std::string& sec, const std::string& key, int& out) const {
    if (const Entry* e = find(sec, key)) out = int(to_int(*e, sec, key, e->value));
  }
  void get(const std::string& sec, const std::string& key, std::uint64_t& out) const {
    if (const Entry* e = find(sec, key)) {
      const long long v = to_int(*e, sec, key, e->value);
      if (v < 0) fail(*e, sec, key, "must be non-negative");
      out = std::uint64_t(v);
    }
  }
  void get(const std::string& sec, const std::string& key, std::string& out) const {
    if (const Entry* e = find(sec, key)) out = e->value;
  }
  void get(const std::string& sec, const std::string& key, bool& out) const {
    if (const Entry* e = find(sec, key)) {
      if (e->value == "true") out = true;
      else if (e->value == "false") out = false;
      else fail(*e, sec, key, "expected true or false");
    }
  }
  void get(const std::string& sec, const std::string& key, std::vector<double>& out) const {
    if (const Entry* e = find(sec, key)) {
      out.clear();
      for (const auto& tok : split(e->value, ',')) out.push_back(to_double(*e, sec, key, tok));
      if (out.empty()) fail(*e, sec, key, "empty list");
    }
  }
  void get(const std::string& sec, const std::string& key, std::vector<int>& out) const {
    if (const Entry* e = find(sec, key)) {
      out.clear();
      for (const auto& tok : split(e->value, ',')) out.push_back(int(to_int(*e, sec, key, tok)));
      if (out.empty()) fail(*e, sec, key, "empty list");
    }
  }
  bool get_matrix(const std::string& sec, const std::string& key, int dim, Eigen::MatrixXd& out) const {
    const Entry* e = find(sec, key);
    if (!e) return false;
    const auto rows = split(e->value, ';');
    if (int(rows.size()) != dim) fail(*e, sec, key, "expected " + std::to_string(dim) + " rows");
    out.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      const auto cols = split(rows[std::size_t(r)], ',');
      if (int(cols.size()) != dim) fail(*e, sec, key, "expected " + std::to_string(dim) + " columns");
      for (int c = 0; c < dim; ++c) out(r, c) = to_double(*e, sec, key, cols[std::size_t(c)]);
    }
    return true;
  }

 private:
  const Table& t_;
};

Table tokenize(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().count(section))
        throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]", line, section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key = value", line);
    if (section.empty())
      throw ConfigError("line " + std::to_string(line) + ": key outside of any section", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!schema().at(section).count(key))
      throw ConfigError("line " + std::to_string(line) + ": unknown field " + section + "." + key, line,
                        section + "." + key);
    if (t[section].count(key))
      throw ConfigError("line " + std::to_string(line) + ": duplicate field " + section + "." + key, line,
                        section + "." + key);
    t[section][key] = Entry{value, line};
  }
  return t;
}

void apply_env(Table& t) {
  for (const auto& [sec, keys] : schema())
    for (const auto& key : keys) {
      const std::string name = "FTL_" + upper(sec) + "_" + upper(key);
      if (const char* v = std::getenv(name.c_str())) t[sec][key] = Entry{trim(v), 0};
    }
}

void preset_blocks(ScenarioConfig& c) {
  QuadraticHamiltonian h;
  if (c.preset == "free") h = free_particle(c.dim);
  else if (c.preset == "harmonic") h = harmonic_oscillator(c.dim);
  else if (c.preset == "anisotropic") {
    if (c.dim != 2) throw ConfigError("preset anisotropic requires dim = 2", 0, "hamiltonian.dim");
    h = anisotropic_oscillator();
  } else {
    throw ConfigError("unknown hamiltonian preset '" + c.preset + "'", 0, "hamiltonian.preset");
  }
  c.A = h.A;
  c.B = h.B;
  c.C = h.C;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::string matrix(const Eigen::MatrixXd& m) {
  std::string s;
  for (Index r = 0; r < m.rows(); ++r) {
    if (r) s += "; ";
    for (Index c = 0; c < m.cols(); ++c) s += (c ? ", " : "") + format_double(m(r, c));
  }
  return s;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, bool env) {
  Table t = tokenize(text);
  if (env) apply_env(t);
  const Reader r(t);
  ScenarioConfig c;
  r.get("scenario", "id", c.id);

  r.get("hamiltonian", "preset", c.preset);
  r.get("hamiltonian", "dim", c.dim);
  r.get("grid", "dim", c.dim);
  if (const Entry* hd = r.find("hamiltonian", "dim"))
    if (const Entry* gd = r.find("grid", "dim"); gd && gd->value != hd->value)
      r.fail(*gd, "grid", "dim", "does not match hamiltonian.dim");
  if (c.dim != 1 && c.dim != 2) {
    const Entry* e = r.find("grid", "dim") ? r.find("grid", "dim") : r.find("hamiltonian", "dim");
    r.fail(*e, e == r.find("grid", "dim") ? "grid" : "hamiltonian", "dim", "must be 1 or 2");
  }
  if (c.preset == "custom") {
    for (const char* k : {"A", "B", "C"}) {
      Eigen::MatrixXd m;
      if (!r.get_matrix("hamiltonian", k, c.dim, m))
        throw ConfigError(std::string("custom hamiltonian requires field hamiltonian.") + k, 0,
                          std::string("hamiltonian.") + k);
      (k[0] == 'A' ? c.A : k[0] == 'B' ? c.B : c.C) = m;
    }
  } else {
    try {
      preset_blocks(c);
    } catch (const ConfigError& e) {
      const Entry* p = r.find("hamiltonian", "preset");
      throw ConfigError((p ? "line " + std::to_string(p->line) + ": " : std::string()) + e.what(), p ? p->line : 0,
                        e.field());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), 0, "hamiltonian.dim");
    }
    for (const char* k : {"A", "B", "C"})
      if (const Entry* e = r.find("hamiltonian", k)) r.fail(*e, "hamiltonian", k, "explicit blocks require preset = custom");
  }

  r.get("potential", "kind", c.potential_kind);
  r.get("potential", "amplitude", c.potential_amplitude);
  r.get("potential", "width", c.potential_width);
  if (c.potential_kind == "cosine") r.get("potential", "frequency", c.potential_vector);
  else if (c.potential_kind == "gaussian") r.get("potential", "center", c.potential_vector);
  if (c.potential_kind == "fourier") {
    const Entry* w = r.find("potential", "weights");
    const Entry* f = r.find("potential", "frequencies");
    if (!w || !f) throw ConfigError("fourier potential requires weights and frequencies", 0, "potential.weights");
    for (const auto& pair : split(w->value, ';')) {
      const auto parts = split(pair, ',');
      if (parts.size() != 2) r.fail(*w, "potential", "weights", "each weight is 're, im'");
      c.measure_weights.emplace_back(r.to_double(*w, "potential", "weights", parts[0]),
                                     r.to_double(*w, "potential", "weights", parts[1]));
    }
    for (const auto& vec : split(f->value, ';')) {
      std::vector<double> v;
      for (const auto& tok : split(vec, ',')) v.push_back(r.to_double(*f, "potential", "frequencies", tok));
      if (int(v.size()) != c.dim) r.fail(*f, "potential", "frequencies", "each frequency needs dim entries");
      c.measure_frequencies.push_back(v);
    }
    if (c.measure_weights.size() != c.measure_frequencies.size())
      r.fail(*f, "potential", "frequencies", "count differs from weights");
  } else if (c.potential_kind == "cosine" || c.potential_kind == "gaussian") {
    if (c.potential_vector.empty()) c.potential_vector.assign(std::size_t(c.dim), c.potential_kind == "cosine" ? 1.0 : 0.0);
    if (int(c.potential_vector.size()) != c.dim) {
      const char* key = c.potential_kind == "cosine" ? "frequency" : "center";
      r.fail(*r.find("potential", key), "potential", key, "needs dim entries");
    }
  } else if (c.potential_kind != "zero") {
    const Entry* e = r.find("potential", "kind");
    r.fail(*e, "potential", "kind", "unknown potential kind '" + c.potential_kind + "'");
  }
  if (c.potential_kind == "gaussian" && !(c.potential_width > 0.0))
    r.fail(*r.find("potential", "width"), "potential", "width", "must be positive");

  r.get("grid", "points", c.grid_points);
  r.get("grid", "half_width", c.grid_half_width);
  if (c.grid_points < 16 || c.grid_points % 2) {
    const Entry* e = r.find("grid", "points");
    throw ConfigError((e ? "line " + std::to_string(e->line) + ": " : std::string()) +
                          "field grid.points: must be even and >= 16", e ? e->line : 0, "grid.points");
  }
  if (!(c.grid_half_width > 0.0)) r.fail(*r.find("grid", "half_width"), "grid", "half_width", "must be positive");

  r.get("run", "times", c.times);
  r.get("run", "schedule", c.schedule);
  r.get("run", "window_width", c.window_width);
  r.get("run", "compact_fraction", c.compact_fraction);
  r.get("run", "seed", c.seed);
  r.get("run", "output", c.output);
  r.get("run", "provenance", c.provenance);
  r.get("run", "steps", c.steps);
  r.get("run", "free_step", c.free_step);
  r.get("run", "placement", c.placement);
  r.get("run", "kernel_norm", c.kernel_norm);
  r.get("run", "atoms", c.atoms);
  r.get("run", "atom_radius", c.atom_radius);
  auto check_choice = [&](const char* key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
      if (v == a) return;
    const Entry* e = r.find("run", key);
    if (e) r.fail(*e, "run", key, "unexpected value '" + v + "'");
    throw ConfigError(std::string("field run.") + key + ": unexpected value", 0, std::string("run.") + key);
  };
  check_choice("provenance", c.provenance, {"metaplectic", "mehler", "eigensolver", "trotter"});
  check_choice("free_step", c.free_step, {"spectral", "sampled_metaplectic"});
  check_choice("placement", c.placement, {"start", "end"});
  if (!(c.compact_fraction > 0.0 && c.compact_fraction < 0.8))
    r.fail(*r.find("run", "compact_fraction"), "run", "compact_fraction", "must lie in (0, 0.8)");
  if (!(c.window_width > 0.0)) r.fail(*r.find("run", "window_width"), "run", "window_width", "must be positive");

  r.get("exceptional", "t_min", c.scan_min);
  r.get("exceptional", "t_max", c.scan_max);
  r.get("exceptional", "step", c.scan_step);

  r.get("amplitude", "x0", c.amp_x0);
  r.get("amplitude", "y0", c.amp_y0);
  r.get("amplitude", "radii", c.radii);
  return c;
}

ScenarioConfig load_config(const std::string& path, bool env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), env);
}

std::string emit_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "[scenario]\nid = " << c.id << "\n\n";
  os << "[hamiltonian]\npreset = " << c.preset << "\ndim = " << c.dim << "\n";
  if (c.preset == "custom") os << "A = " << matrix(c.A) << "\nB = " << matrix(c.B) << "\nC = " << matrix(c.C) << "\n";
  os << "\n[potential]\nkind = " << c.potential_kind << "\n";
  if (c.potential_kind == "cosine")
    os << "amplitude = " << format_double(c.potential_amplitude) << "\nfrequency = " << list(c.potential_vector) << "\n";
  if (c.potential_kind == "gaussian")
    os << "amplitude = " << format_double(c.potential_amplitude) << "\ncenter = " << list(c.potential_vector)
       << "\nwidth = " << format_double(c.potential_width) << "\n";
  if (c.potential_kind == "fourier") {
    os << "weights = ";
    for (std::size_t i = 0; i < c.measure_weights.size(); ++i)
      os << (i ? "; " : "") << format_double(c.measure_weights[i].real()) << ", "
         << format_double(c.measure_weights[i].imag());
    os << "\nfrequencies = ";
    for (std::size_t i = 0; i < c.measure_frequencies.size(); ++i) os << (i ? "; " : "") << list(c.measure_frequencies[i]);
    os << "\n";
  }
  os << "\n[grid]\npoints = " << c.grid_points << "\nhalf_width = " << format_double(c.grid_half_width) << "\n";
  os << "\n[run]\ntimes = " << list(c.times) << "\nschedule = ";
  for (std::size_t i = 0; i < c.schedule.size(); ++i) os << (i ? ", " : "") << c.schedule[i];
  os << "\nwindow_width = " << format_double(c.window_width) << "\ncompact_fraction = " << format_double(c.compact_fraction)
     << "\nseed = " << c.seed << "\noutput = " << c.output << "\nprovenance = " << c.provenance << "\nsteps = " << c.steps
     << "\nfree_step = " << c.free_step << "\nplacement = " << c.placement
     << "\nkernel_norm = " << (c.kernel_norm ? "true" : "false") << "\natoms = " << c.atoms
     << "\natom_radius = " << format_double(c.atom_radius) << "\n";
  os << "\n[exceptional]\nt_min = " << format_double(c.scan_min) << "\nt_max = " << format_double(c.scan_max)
     << "\nstep = " << format_double(c.scan_step) << "\n";
  os << "\n[amplitude]\nx0 = " << list(c.amp_x0) << "\ny0 = " << list(c.amp_y0) << "\nradii = " << list(c.radii) << "\n";
  return os.str();
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return id == o.id && preset == o.preset && dim == o.dim && A == o.A && B == o.B && C == o.C &&
         potential_kind == o.potential_kind && potential_amplitude == o.potential_amplitude &&
         potential_vector == o.potential_vector && potential_width == o.potential_width &&
         measure_weights == o.measure_weights && measure_frequencies == o.measure_frequencies &&
         grid_points == o.grid_points && grid_half_width == o.grid_half_width && times == o.times &&
         schedule == o.schedule && window_width == o.window_width && compact_fraction == o.compact_fraction &&
         seed == o.seed && output == o.output && provenance == o.provenance && steps == o.steps &&
         free_step == o.free_step && placement == o.placement && kernel_norm == o.kernel_norm && atoms == o.atoms &&
         atom_radius == o.atom_radius && scan_min == o.scan_min && scan_max == o.scan_max &&
         scan_step == o.scan_step && amp_x0 == o.amp_x0 && amp_y0 == o.amp_y0 && radii == o.radii;
}

QuadraticHamiltonian ScenarioConfig::hamiltonian() const {
  QuadraticHamiltonian h;
  h.dim = dim;
  h.A = A;
  h.B = B;
  h.C = C;
  auto vec = [](const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), Index(v.size())); };
  if (potential_kind == "zero") h.potential = Potential::zero(dim);
  else if (potential_kind == "cosine") h.potential = Potential::cosine(potential_amplitude, vec(potential_vector));
  else if (potential_kind == "gaussian")
    h.potential = Potential::gaussian_bump(potential_amplitude, vec(potential_vector), potential_width);
  else {
    std::vector<FourierAtom> atoms;
    for (std::size_t i = 0; i < measure_weights.size(); ++i)
      atoms.push_back({measure_weights[i], vec(measure_frequencies[i])});
    h.potential = Potential::fourier_measure(std::move(atoms));
  }
  h.validate();
  return h;
}

Grid ScenarioConfig::grid() const { return Grid(dim, grid_points, grid_half_width); }

StudySetup ScenarioConfig::setup() const {
  StudySetup s;
  s.id = id;
  s.hamiltonian = hamiltonian();
  s.grid = grid();
  s.window_width = window_width;
  s.compact.inner_fraction = compact_fraction;
  s.compact.outer_fraction = std::max(0.8, compact_fraction + 0.1);
  s.seed = seed;
  s.atom_count = atoms;
  s.atom_radius = atom_radius;
  s.trotter.free_step = free_step == "spectral" ? FreeStep::spectral : FreeStep::sampled_metaplectic;
  s.trotter.placement = placement == "start" ? Placement::start : Placement::end;
  s.kernel_norm = kernel_norm;
  return s;
}

}  // namespace ftlab
