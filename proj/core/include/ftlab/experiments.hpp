#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftlab/timefreq.hpp"

namespace ftlab {

// STFT sub-lattice for kernels seen as functions on the 2-D grid: window-scale stride, patch of 8 widths.
StftLattice kernel_lattice(const Grid& g, double width);

struct StudySetup {
  std::string id = "scenario";
  QuadraticHamiltonian hamiltonian = harmonic_oscillator(1);
  Grid grid = Grid(1, 256, 12.0);
  double window_width = 1.0;
  CompactWindow compact{};
  std::uint64_t seed = 12345;
  int atom_count = 25;
  double atom_radius = 3.0;
  TrotterOptions trotter{};
  bool kernel_norm = true;  // the M^{inf,1} column is the costliest metric on large grids
};

// Acceptance bounds used by the studies; every report carries them.
struct StudyBounds {
  double ratio_low = 0.4;
  double ratio_high = 0.6;
  double overall_decay = 0.01;
  double norm_band = 3.0;
  double weakstar_decay = 0.05;
  double sup_stagnation = 0.1;
  double amplitude_tolerance = 0.05;
  double error_floor = 1e-10;  // errors below this count as exact
  int tail = 3;
};

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ConvergenceRow {
  int n = 0;
  int steps_used = 0;
  double sup_err = 0.0;
  double fl1_err = 0.0;
  double minfty1_norm = 0.0;
  double weakstar_max_gap = 0.0;
  double m1_slice_err = 0.0;
  double boundary_mass = 0.0;
  double l1_slice_err = 0.0;
  double l2_slice_err = 0.0;
  double linf_slice_err = 0.0;
  double reflection_residual = -1.0;  // harmonic flow at t = k pi only
  std::vector<double> atom_gaps;
  double wall_seconds = 0.0;
};

struct ConvergenceReport {
  std::string study;
  std::string scenario_id;
  double t = 0.0;
  std::vector<int> schedule;
  std::vector<ConvergenceRow> rows;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> metric_windows;
  StudyBounds bounds;
  double reference_band_mass = 0.0;
  bool flattened = true;

  bool passed() const;
  std::string csv() const;          // n, sup_err, fl1_err, minfty1_norm, weakstar_max_gap, m1_slice_err, boundary_mass
  std::string json_lines() const;   // one object per row plus a summary line
};

// Seeded lattice points z = (x0, xi0, y0, eta0) on a 0.5 lattice with |z| <= radius; z = 0 first.
std::vector<KernelAtom> atom_battery(const StudySetup& s);

ConvergenceReport converge_study(const StudySetup& s, double t, const std::vector<int>& schedule,
                                 StudyBounds bounds = {});
ConvergenceReport weakstar_study(const StudySetup& s, double t, const std::vector<int>& schedule,
                                 StudyBounds bounds = {});
ConvergenceReport m1_slice_study(const StudySetup& s, double t, const std::vector<int>& schedule,
                                 StudyBounds bounds = {});

// Slice pairing <K(x, .), phi> (rows) or <K(., y), phi> (columns) as a grid function.
WaveFunction kernel_slice(const SampledKernel& k, const Eigen::VectorXcd& phi, bool rows = true);

struct AmplitudeRow {
  double a = 0.0, b = 0.0;          // requested radii
  double a_eff = 0.0, b_eff = 0.0;  // radii of the discrete balls (same measure)
  cplx amplitude{0.0, 0.0};
  double rescaled = 0.0;            // |I| / (a_eff b_eff)^{d/2}
};

struct AmplitudeStudy {
  double t = 0.0;
  Eigen::VectorXd x0, y0;
  int dim = 1;
  double c_dim = 2.0;
  std::vector<AmplitudeRow> rows;
  double extrapolated = 0.0;
  double reference = 0.0;          // C |u_t(x0, y0)|
  std::string reference_source;
  double relative_error = 0.0;
  cplx phase_ratio{1.0, 0.0};      // I / (C u_t) at the smallest radius when the phase is known
  std::vector<Check> checks;
  StudyBounds bounds;

  bool passed() const;
  std::string csv() const;
  std::string json_lines() const;
};

struct IndicatorBall {
  Eigen::VectorXcd values;  // normalized in the discrete L2 norm
  double effective_radius = 0.0;
  Index cells = 0;
};
IndicatorBall indicator_ball(const Grid& grid, const Eigen::VectorXd& center, double radius);

// <B|U(t)|A> with |A> centered at y0 (radius a) and |B> at x0 (radius b). Defined for every t.
cplx transition_amplitude(const SpectralPropagator& u, double t, const IndicatorBall& a, const IndicatorBall& b);

AmplitudeStudy amplitude_study(const StudySetup& s, double t, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0,
                               const std::vector<double>& radii, StudyBounds bounds = {});

}  // namespace ftlab
