#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "ftlab/propagators.hpp"

using namespace ftlab;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

// Free kernel (2 pi i t)^{-1/2} e^{i (x-y)^2 / (2 t)}, principal root.
cplx free_kernel(double t, double x, double y) {
  return std::pow(cplx(0.0, kTwoPi * t), -0.5) * std::exp(cplx(0.0, (x - y) * (x - y) / (2.0 * t)));
}

QuadraticHamiltonian with_cosine(QuadraticHamiltonian h, double a = 1.0) {
  h.potential = Potential::cosine(a, v1(1.0));
  return h;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(PhasePhi, ClosedForms) {
  const auto free = metaplectic_spec(free_particle(1), 0.7);
  for (double x : {-1.0, 0.3}) {
    for (double y : {0.0, 2.0}) {
      EXPECT_NEAR(phase_phi(free, v1(x), v1(y)), (x - y) * (x - y) / (4.0 * kPi * 0.7), 1e-13);
    }
  }
  EXPECT_EQ(phase_phi(free, v1(0.0), v1(0.0)), 0.0);
  const auto ho = metaplectic_spec(harmonic_oscillator(1), kPi / 2);
  EXPECT_NEAR(phase_phi(ho, v1(1.5), v1(-0.4)), 0.6, 1e-13);
}

TEST(PhasePhi, MixedDerivativeIsMinusInverseB) {
  const auto s = metaplectic_spec(harmonic_oscillator(1), 1.0);
  const double e = 1e-3;
  auto phi = [&](double x, double y) { return phase_phi(s, v1(x), v1(y)); };
  const double mixed = (phi(0.3 + e, 0.2 + e) - phi(0.3 + e, 0.2 - e) - phi(0.3 - e, 0.2 + e) + phi(0.3 - e, 0.2 - e)) /
                       (4.0 * e * e);
  EXPECT_NEAR(mixed, -1.0 / std::sin(1.0), 1e-6);
}

TEST(Metaplectic, RefusesExceptionalTimes) {
  EXPECT_THROW(metaplectic_spec(free_particle(1), 0.0), ExceptionalTimeError);
  EXPECT_THROW(metaplectic_spec(harmonic_oscillator(1), kPi), ExceptionalTimeError);
  try {
    metaplectic_spec(harmonic_oscillator(1), kPi);
  } catch (const ExceptionalTimeError& e) {
    EXPECT_LT(std::abs(e.determinant()), 1e-10);
  }
}

TEST(Metaplectic, FreeKernelClosedForm) {
  const Grid g(1, 256, 12.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const SampledKernel k = metaplectic_kernel(free_particle(1), t, g);
    EXPECT_NEAR(std::abs(k.phase), 1.0, 1e-10);
    double worst = 0.0;
    for (int i = 0; i < 256; i += 5)
      for (int j = 0; j < 256; j += 7)
        worst = std::max(worst, std::abs(k.values(i, j) - free_kernel(t, g.node(i), g.node(j))));
    EXPECT_LT(worst, 1e-9) << "t = " << t;
  }
}

TEST(Mehler, ModulusAndConstants) {
  const Grid g(1, 128, 8.0);
  for (double t : {kPi / 4, kPi / 2, 3 * kPi / 4, 4.0}) {
    const auto r = mehler_kernel(t, g);
    ASSERT_TRUE(std::holds_alternative<SampledKernel>(r));
    const auto& k = std::get<SampledKernel>(r);
    const double expect = std::pow(std::abs(std::sin(t)), -0.5);
    EXPECT_LT((k.values.cwiseAbs().array() - expect).abs().maxCoeff(), 1e-12);
  }
  EXPECT_NEAR(std::abs(mehler_constant(0) - std::exp(cplx(0.0, -kPi / 4))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(mehler_constant(1) - std::exp(cplx(0.0, -3 * kPi / 4))), 0.0, 1e-15);
  // Calibrated phase on (0, pi) is c(0).
  const auto k = std::get<SampledKernel>(mehler_kernel(kPi / 2, g));
  EXPECT_NEAR(std::abs(k.phase - mehler_constant(0)), 0.0, 1e-8);
  const auto k1 = std::get<SampledKernel>(mehler_kernel(kPi + 1.0, g));
  EXPECT_NEAR(std::abs(k1.phase - mehler_constant(1)), 0.0, 1e-8);
}

TEST(Mehler, ReflectionDescriptorAtPi) {
  const Grid g(1, 128, 8.0);
  const auto r = mehler_kernel(kPi, g);
  ASSERT_TRUE(std::holds_alternative<ReflectionDescriptor>(r));
  const auto& d = std::get<ReflectionDescriptor>(r);
  EXPECT_EQ(d.k, 1);
  EXPECT_EQ(d.parity, -1);
  // U(pi) f(x) = e^{-i pi / 2} f(-x) from the spectrum n + 1/2.
  EXPECT_NEAR(std::abs(d.c_prime - cplx(0.0, -1.0)), 0.0, 1e-8);
  const auto r2 = std::get<ReflectionDescriptor>(mehler_kernel(2 * kPi, g));
  EXPECT_EQ(r2.parity, 1);
  EXPECT_NEAR(std::abs(r2.c_prime - cplx(-1.0, 0.0)), 0.0, 1e-8);
}

TEST(GridHamiltonian, KineticPartIsFourierMultiplier) {
  const Grid g(1, 64, 4.0);
  const Eigen::MatrixXcd h = grid_hamiltonian(free_particle(1), g);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(64);
  for (auto& x : v) x = cplx(d(rng), d(rng));
  Eigen::VectorXcd m(64);
  for (int k = 0; k < 64; ++k) m[k] = 2.0 * kPi * kPi * g.frequency(k) * g.frequency(k);
  EXPECT_LT((h * v - apply_multiplier(g, v, m)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-10);
}

TEST(GridHamiltonian, HarmonicSpectrum) {
  const Grid g(1, 128, 8.0);
  SpectralPropagator u(harmonic_oscillator(1), g);
  const auto& ev = u.eigenvalues();
  for (int n = 0; n < 10; ++n) EXPECT_NEAR(ev[n], n + 0.5, 1e-10);
  EXPECT_LT(u.ground_state_band_mass(), kBandMassLimit);
}

TEST(Eigensolver, IdentityAtZeroAndUnitary) {
  const Grid g(1, 128, 8.0);
  const auto h = with_cosine(harmonic_oscillator(1));
  const SampledKernel k0 = eigensolver_reference(h, 0.0, g);
  EXPECT_LT(max_abs(k0.as_operator() - Eigen::MatrixXcd::Identity(128, 128)), 1e-12);
  const SampledKernel k = eigensolver_reference(h, 1.3, g);
  EXPECT_LT(unitarity_defect(k.as_operator()), 1e-8);
}

TEST(Eigensolver, MatchesDenseExponential) {
  const Grid g(1, 64, 5.0);
  const auto h = with_cosine(harmonic_oscillator(1), 0.7);
  const Eigen::MatrixXcd hg = grid_hamiltonian(h, g);
  const Eigen::MatrixXcd ref = (cplx(0.0, -0.9) * hg).exp();
  EXPECT_LT(max_abs(eigensolver_reference(h, 0.9, g).as_operator() - ref), 1e-9);
}

TEST(Eigensolver, AgreesWithClosedFormsOnGaussianProbes) {
  // The sampled chirps are not band-limited, so the oracles are compared as operators
  // on smooth, decaying inputs.
  const Grid g(1, 256, 12.0);
  for (double shift : {0.0, 1.5}) {
    const WaveFunction probe = gaussian(g, 1.0, v1(shift), v1(0.3));
    const Eigen::VectorXcd e = eigensolver_reference(free_particle(1), 1.0, g).as_operator() * probe.values;
    const Eigen::VectorXcd m = metaplectic_kernel(free_particle(1), 1.0, g).as_operator() * probe.values;
    // The free packet's tail reaches the periodic boundary of the grid reference; compare on the core.
    EXPECT_LT((e - m).segment(80, 96).cwiseAbs().maxCoeff(), 1e-8);
    // The sampled Fourier kernel e^{-2 pi i x y} aliases for |x| beyond 1/(2h).
    const Eigen::VectorXcd eh = eigensolver_reference(harmonic_oscillator(1), kPi / 2, g).as_operator() * probe.values;
    const Eigen::VectorXcd mh = std::get<SampledKernel>(mehler_kernel(kPi / 2, g)).as_operator() * probe.values;
    EXPECT_LT((eh - mh).segment(64, 128).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Eigensolver, ComplexPotentialIsContraction) {
  const Grid g(1, 64, 5.0);
  QuadraticHamiltonian h = harmonic_oscillator(1);
  h.potential = Potential::fourier_measure({{cplx(0.0, -0.3), v1(0.0)}, {cplx(0.2, 0.0), v1(1.0)}});
  SpectralPropagator u(h, g);
  EXPECT_FALSE(u.hermitian());
  const double bound = std::exp(1.0 * h.potential.imag_sup_bound());
  const Eigen::MatrixXcd op = u.operator_at(1.0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op);
  EXPECT_LE(svd.singularValues()[0], bound + 1e-9);
  EXPECT_FALSE(eigensolver_reference(h, 1.0, g).unitary);
}

TEST(Trotter, ExactWithoutPotential) {
  const Grid g(1, 128, 8.0);
  for (const auto& h : {free_particle(1), harmonic_oscillator(1)}) {
    const SampledKernel ref = eigensolver_reference(h, 1.0, g);
    for (int n : {1, 8, 64}) {
      const SampledKernel k = trotter_propagator(h, 1.0, n, g);
      EXPECT_LT(max_abs(k.as_operator() - ref.as_operator()), 1e-10) << "n = " << n;
    }
  }
}

TEST(Trotter, UnitaryAndSemigroup) {
  const Grid g(1, 64, 5.0);
  const auto h = with_cosine(harmonic_oscillator(1));
  const TrotterPropagator tp(h, g);
  const Eigen::MatrixXcd full = tp.operator_at(1.2, 16);
  EXPECT_LT(unitarity_defect(full), 1e-8);
  const Eigen::MatrixXcd half = tp.operator_at(0.6, 8);
  EXPECT_LT(max_abs(full - half * half), 1e-10);
}

TEST(Trotter, PlacementsAreConjugate) {
  // (D M)^n = D (M D)^n D^{-1}
  const Grid g(1, 64, 5.0);
  const auto h = with_cosine(harmonic_oscillator(1));
  TrotterOptions end;
  end.placement = Placement::end;
  const double t = 0.8;
  const int n = 4;
  const Eigen::MatrixXcd a = TrotterPropagator(h, g).operator_at(t, n);
  const Eigen::MatrixXcd b = TrotterPropagator(h, g, end).operator_at(t, n);
  const Eigen::VectorXcd dv = (cplx(0.0, -t / n) * h.potential.sample(g)).array().exp();
  const Eigen::MatrixXcd conj = dv.asDiagonal() * a * dv.conjugate().asDiagonal();
  EXPECT_LT(max_abs(b - conj), 1e-12);
}

TEST(Trotter, ApplyMatchesOperator) {
  const Grid g(1, 64, 5.0);
  const auto h = with_cosine(free_particle(1), 0.5);
  const TrotterPropagator tp(h, g);
  const Eigen::VectorXcd v = standard_gaussian(g).values;
  EXPECT_LT((tp.apply(0.7, 5, v) - tp.operator_at(0.7, 5) * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Trotter, SingleSampledStepIsFreeKernelTimesPotential) {
  const Grid g(1, 128, 8.0);
  const auto h = with_cosine(free_particle(1), 0.5);
  TrotterOptions o;
  o.free_step = FreeStep::sampled_metaplectic;
  const double t = 0.9;
  const SampledKernel k = trotter_propagator(h, t, 1, g, o);
  double worst = 0.0;
  for (int i = 0; i < 128; i += 3)
    for (int j = 0; j < 128; j += 5) {
      const cplx expect = free_kernel(t, g.node(i), g.node(j)) * std::exp(cplx(0.0, -t) * h.potential(v1(g.node(j))));
      worst = std::max(worst, std::abs(k.values(i, j) - expect));
    }
  EXPECT_LT(worst, 1e-9);
}

TEST(Trotter, SampledRouteSkipsExceptionalSteps) {
  const Grid g(1, 64, 5.0);
  TrotterOptions o;
  o.free_step = FreeStep::sampled_metaplectic;
  const TrotterPropagator tp(harmonic_oscillator(1), g, o);
  // t / 2 = pi is exceptional; n = 3 is not.
  EXPECT_EQ(tp.resolve_steps(2 * kPi, 2), 3);
  EXPECT_EQ(tp.resolve_steps(1.0, 2), 2);
}

TEST(ActionSum, HandValues) {
  const auto h = free_particle(1);
  EXPECT_NEAR(action_sum(h, 1.0, {v1(0.0), v1(1.0)}), 0.5, 1e-15);
  EXPECT_NEAR(action_sum(h, 1.0, {v1(0.0), v1(0.5), v1(1.0)}), 0.5, 1e-15);
  // Straight path minimizes the free action among perturbations.
  for (double e : {-0.2, 0.1, 0.3})
    EXPECT_GT(action_sum(h, 1.0, {v1(0.0), v1(0.5 + e), v1(1.0)}), 0.5);
  // Potential placement.
  const auto hv = with_cosine(free_particle(1));
  const double end = action_sum(hv, 1.0, {v1(0.0), v1(0.0)}, Placement::end);
  const double start = action_sum(hv, 1.0, {v1(0.5), v1(0.5)}, Placement::start);
  EXPECT_NEAR(end, -1.0, 1e-15);
  EXPECT_NEAR(start, 1.0, 1e-15);
}

TEST(TimeSlice, SingleSliceIsAnalytic) {
  const Grid g(1, 64, 5.0);
  const auto h = with_cosine(free_particle(1), 0.4);
  const double t = 0.8, x = 0.3, y = -0.6;
  const cplx k0 = free_kernel(t, x, y);
  EXPECT_LT(std::abs(timeslice_kernel_quadrature(h, t, 1, g, x, y, Placement::end) -
                     k0 * std::exp(cplx(0.0, -t) * h.potential(v1(x)))),
            1e-13);
  EXPECT_LT(std::abs(timeslice_kernel_quadrature(h, t, 1, g, x, y, Placement::start) -
                     k0 * std::exp(cplx(0.0, -t) * h.potential(v1(y)))),
            1e-13);
}

TEST(TimeSlice, TwoSlicesMatchFineSimpsonRule) {
  // Independent oracle: composite Simpson on [-L, L] with a very fine step.
  const Grid g(1, 32, 3.0);
  const auto h = with_cosine(free_particle(1), 0.5);
  const double t = 1.0, tau = 0.5, x = 0.4, y = -0.2;
  auto f = [&](double z) {
    return free_kernel(tau, x, z) * free_kernel(tau, z, y) * std::exp(cplx(0.0, -tau) * h.potential(v1(z))) *
           std::exp(cplx(0.0, -tau) * h.potential(v1(y)));
  };
  const int m = 400000;
  const double a = -3.0, b = 3.0, dz = (b - a) / m;
  cplx acc = f(a) + f(b);
  for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * dz);
  acc *= dz / 3.0;
  EXPECT_LT(std::abs(timeslice_kernel_quadrature(h, t, 2, g, x, y, Placement::start) - acc), 1e-8);
}

TEST(TimeSlice, Guards) {
  const Grid g(1, 32, 3.0);
  EXPECT_THROW(timeslice_kernel_quadrature(free_particle(1), 1.0, 4, g, 0, 0), std::invalid_argument);
  EXPECT_THROW(timeslice_kernel_quadrature(harmonic_oscillator(1), 1.0, 2, g, 0, 0), std::invalid_argument);
  EXPECT_THROW(timeslice_kernel_quadrature(free_particle(1), 0.0, 2, g, 0, 0), ExceptionalTimeError);
}
