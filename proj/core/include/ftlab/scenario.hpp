#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftlab/experiments.hpp"

namespace ftlab {

// One scenario per file: flat `key = value` lines grouped under [section] headers.
// Lists are comma separated; matrix rows and measure atoms are separated by ';'.
struct ScenarioConfig {
  std::string id = "scenario";

  std::string preset = "harmonic";  // free | harmonic | anisotropic | custom
  int dim = 1;
  Eigen::MatrixXd A, B, C;          // filled from the preset unless custom

  std::string potential_kind = "zero";  // zero | cosine | gaussian | fourier
  double potential_amplitude = 0.0;
  std::vector<double> potential_vector;  // frequency (cosine) or center (gaussian)
  double potential_width = 1.0;
  std::vector<cplx> measure_weights;
  std::vector<std::vector<double>> measure_frequencies;

  int grid_points = 256;
  double grid_half_width = 12.0;

  std::vector<double> times{1.0};
  std::vector<int> schedule{8, 16, 32, 64, 128};
  double window_width = 1.0;
  double compact_fraction = 0.5;
  std::uint64_t seed = 12345;
  std::string output = "out";
  std::string provenance = "eigensolver";
  int steps = 64;
  std::string free_step = "spectral";
  std::string placement = "start";
  bool kernel_norm = true;
  int atoms = 25;
  double atom_radius = 3.0;

  double scan_min = -10.0;
  double scan_max = 10.0;
  double scan_step = 0.01;

  std::vector<double> amp_x0{1.0};
  std::vector<double> amp_y0{0.0};
  std::vector<double> radii{1.0, 0.5, 0.25};

  bool operator==(const ScenarioConfig& o) const;

  QuadraticHamiltonian hamiltonian() const;
  Grid grid() const;
  StudySetup setup() const;
};

// Throws ConfigError with the line number and field name on malformed input.
// Environment variables FTL_<SECTION>_<KEY> override file values when `env` is set.
ScenarioConfig parse_config(const std::string& text, bool env = false);
ScenarioConfig load_config(const std::string& path, bool env = false);
std::string emit_config(const ScenarioConfig& c);

}  // namespace ftlab
