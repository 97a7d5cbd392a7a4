#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ftlab/propagators.hpp"

namespace ftlab {

// Writes `bytes` to `path` through a temporary file in the same directory and a rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Shortest round-tripping representation is not required; 17 significant digits are.
std::string format_double(double v);

struct KernelSidecar {
  int d = 1;
  int N = 0;
  double L = 0.0;
  double t = 0.0;
  int n = 0;
  std::string provenance;
  std::string hamiltonian_json;  // {"A":..,"B":..,"C":..}
  std::string potential_json;
  cplx c_t{1.0, 0.0};
  double boundary_mass = 0.0;
  std::string checksum;
};

// Raw dump: row-major K(x_j, y_k), interleaved re/im float64 little-endian, no header.
std::string kernel_bytes(const SampledKernel& k);
SampledKernel kernel_from_bytes(const std::string& bytes, const Grid& grid);

KernelSidecar make_sidecar(const SampledKernel& k, const QuadraticHamiltonian& h, double boundary_mass);
std::string sidecar_json(const KernelSidecar& s);
KernelSidecar parse_sidecar(const std::string& json);

// Writes <stem>.bin and <stem>.json; returns the sidecar that was written.
KernelSidecar write_kernel_dump(const std::filesystem::path& stem, const SampledKernel& k,
                                const QuadraticHamiltonian& h);

// Boundary mass of a kernel: worst column (propagated delta) normalized mass in the outer shell.
double kernel_boundary_mass(const SampledKernel& k);

}  // namespace ftlab
