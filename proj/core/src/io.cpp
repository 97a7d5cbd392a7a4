#include "ftlab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"

namespace ftlab {

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

namespace {

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

double get_le(const std::string& in, std::size_t off) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(in[off + std::size_t(i)])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string kernel_bytes(const SampledKernel& k) {
  std::string out;
  out.reserve(std::size_t(k.values.size()) * 16);
  for (Index r = 0; r < k.values.rows(); ++r)
    for (Index c = 0; c < k.values.cols(); ++c) {
      put_le(out, k.values(r, c).real());
      put_le(out, k.values(r, c).imag());
    }
  return out;
}

SampledKernel kernel_from_bytes(const std::string& bytes, const Grid& grid) {
  const Index n = grid.size();
  if (bytes.size() != std::size_t(n * n) * 16) throw Error("kernel dump has unexpected size");
  SampledKernel k;
  k.grid = grid;
  k.values.resize(n, n);
  std::size_t off = 0;
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c, off += 16) k.values(r, c) = cplx(get_le(bytes, off), get_le(bytes, off + 8));
  return k;
}

double kernel_boundary_mass(const SampledKernel& k) {
  // Columns are images of grid deltas; use the image of the standard Gaussian instead,
  // which is what "mass reaching the boundary" means for a propagated state.
  const WaveFunction g = standard_gaussian(k.grid);
  return boundary_mass(WaveFunction{k.grid, k.as_operator() * g.values});
}

KernelSidecar make_sidecar(const SampledKernel& k, const QuadraticHamiltonian& h, double bm) {
  KernelSidecar s;
  s.d = k.grid.dim();
  s.N = k.grid.points();
  s.L = k.grid.half_width();
  s.t = k.t;
  s.n = k.steps;
  s.provenance = to_string(k.provenance);
  s.hamiltonian_json = h.blocks_json();
  s.potential_json = h.potential.descriptor();
  s.c_t = k.phase;
  s.boundary_mass = bm;
  return s;
}

std::string sidecar_json(const KernelSidecar& s) {
  nlohmann::ordered_json j;
  j["d"] = s.d;
  j["N"] = s.N;
  j["L"] = s.L;
  j["t"] = s.t;
  j["n"] = s.n;
  j["provenance"] = s.provenance;
  j["hamiltonian"] = nlohmann::json::parse(s.hamiltonian_json);
  j["potential"] = nlohmann::json::parse(s.potential_json);
  j["c_t"] = {s.c_t.real(), s.c_t.imag()};
  j["boundary_mass"] = s.boundary_mass;
  j["checksum"] = s.checksum;
  return j.dump(2) + "\n";
}

KernelSidecar parse_sidecar(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  KernelSidecar s;
  s.d = j.at("d");
  s.N = j.at("N");
  s.L = j.at("L");
  s.t = j.at("t");
  s.n = j.at("n");
  s.provenance = j.at("provenance");
  s.hamiltonian_json = j.at("hamiltonian").dump();
  s.potential_json = j.at("potential").dump();
  s.c_t = cplx(j.at("c_t")[0], j.at("c_t")[1]);
  s.boundary_mass = j.at("boundary_mass");
  s.checksum = j.value("checksum", "");
  return s;
}

KernelSidecar write_kernel_dump(const std::filesystem::path& stem, const SampledKernel& k,
                                const QuadraticHamiltonian& h) {
  const std::string bytes = kernel_bytes(k);
  KernelSidecar s = make_sidecar(k, h, kernel_boundary_mass(k));
  s.checksum = hex64(fnv1a64(bytes));
  std::filesystem::path bin = stem, side = stem;
  bin += ".bin";
  side += ".json";
  atomic_write(bin, bytes);
  atomic_write(side, sidecar_json(s));
  return s;
}

}  // namespace ftlab
