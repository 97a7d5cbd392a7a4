#include <gtest/gtest.h>

#include <cstdlib>

#include "ftlab/scenario.hpp"

using namespace ftlab;

TEST(Scenario, DefaultsRoundTrip) {
  const ScenarioConfig c = parse_config("");
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(c.A, harmonic_oscillator(1).A);
}

TEST(Scenario, FullRoundTrip) {
  const std::string text = R"(# comment
[scenario]
id = study-7
[hamiltonian]
preset = custom
dim = 1
A = 0.1
B = 0.30000000000000004
C = 39.478417604357432
[potential]
kind = fourier
weights = 0.5, 0; 0.5, 0; 0.1, 0.2
frequencies = 1; -1; 0.3333333333333333
[grid]
points = 128
half_width = 6.5
[run]
times = 1, 3.141592653589793
schedule = 4, 8
window_width = 0.7
compact_fraction = 0.4
seed = 99
output = results
provenance = trotter
steps = 12
free_step = sampled_metaplectic
placement = end
kernel_norm = false
atoms = 5
atom_radius = 2
[exceptional]
t_min = -1
t_max = 2
step = 0.001
[amplitude]
x0 = 0.5
y0 = -0.5
radii = 2, 1
)";
  const ScenarioConfig c = parse_config(text);
  EXPECT_EQ(c.id, "study-7");
  EXPECT_EQ(c.B(0, 0), 0.30000000000000004);
  EXPECT_EQ(c.measure_weights.size(), 3u);
  EXPECT_EQ(c.measure_frequencies[2][0], 0.3333333333333333);
  EXPECT_FALSE(c.kernel_norm);
  const std::string emitted = emit_config(c);
  const ScenarioConfig again = parse_config(emitted);
  EXPECT_EQ(again, c);
  EXPECT_EQ(emit_config(again), emitted);
  EXPECT_FALSE(c.hamiltonian().potential.is_real());
}

TEST(Scenario, PresetsExpand) {
  const ScenarioConfig f = parse_config("[hamiltonian]\npreset = free\n");
  EXPECT_EQ(f.C(0, 0), free_particle(1).C(0, 0));
  const ScenarioConfig a = parse_config("[hamiltonian]\npreset = anisotropic\ndim = 2\n");
  EXPECT_EQ(a.A, anisotropic_oscillator().A);
  EXPECT_EQ(a.grid().dim(), 2);
}

TEST(Scenario, ErrorsCarryLineAndField) {
  try {
    parse_config("[grid]\npoints = 64\nhalf_width = wide\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "grid.half_width");
  }
  try {
    parse_config("[run]\n\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "run.bogus");
  }
  EXPECT_THROW(parse_config("[nowhere]\n"), ConfigError);
  EXPECT_THROW(parse_config("x = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\ntimes = 1, inf\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nplacement = middle\n"), ConfigError);
  EXPECT_THROW(parse_config("[hamiltonian]\npreset = custom\nA = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[hamiltonian]\npreset = free\nA = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\npoints = 63\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nseed = 1\nseed = 2\n"), ConfigError);
}

TEST(Scenario, EnvironmentOverrides) {
  ::setenv("FTL_GRID_POINTS", "64", 1);
  ::setenv("FTL_RUN_SEED", "7", 1);
  const ScenarioConfig c = parse_config("[grid]\npoints = 512\n", true);
  EXPECT_EQ(c.grid_points, 64);
  EXPECT_EQ(c.seed, 7u);
  const ScenarioConfig d = parse_config("[grid]\npoints = 512\n", false);
  EXPECT_EQ(d.grid_points, 512);
  ::unsetenv("FTL_GRID_POINTS");
  ::unsetenv("FTL_RUN_SEED");
}

TEST(Scenario, SetupCarriesRunOptions) {
  const ScenarioConfig c = parse_config("[run]\nfree_step = sampled_metaplectic\nplacement = end\natoms = 3\n");
  const StudySetup s = c.setup();
  EXPECT_EQ(s.trotter.free_step, FreeStep::sampled_metaplectic);
  EXPECT_EQ(s.trotter.placement, Placement::end);
  EXPECT_EQ(s.atom_count, 3);
}
