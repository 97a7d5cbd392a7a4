#include <gtest/gtest.h>

#include <random>

#include "ftlab/timefreq.hpp"

using namespace ftlab;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

WaveFunction bump(const Grid& g) {
  return sample(g, [](const Eigen::VectorXd& x) {
    return cplx(std::exp(-kPi * (x[0] - 0.5) * (x[0] - 0.5)), 0.3 * x[0] * std::exp(-kPi * x[0] * x[0]));
  });
}

Eigen::MatrixXcd symbol(const Grid& g, const std::function<cplx(double, double)>& s) {
  const int n = g.points();
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = s(g.node(i), g.frequency(k));
  return m;
}

}  // namespace

TEST(Stft, GaussianAmbiguityFunction) {
  const Grid g(1, 128, 8.0);
  const Window w = gaussian_window(g);
  const STFTGram v = stft(w.sampled, w);
  ASSERT_EQ(v.values.rows(), 128);
  double worst = 0.0;
  for (Index r = 0; r < v.values.rows(); ++r)
    for (Index c = 0; c < v.values.cols(); ++c) {
      const double x = v.position(r)[0], xi = v.frequency(c)[0];
      worst = std::max(worst, std::abs(std::abs(v.values(r, c)) - std::exp(-kPi * (x * x + xi * xi) / 2)));
    }
  EXPECT_LT(worst, 1e-8);
  EXPECT_NEAR(std::abs(v.values(64, v.values.cols() / 2) - cplx(1.0)), 0.0, 1e-10);
}

TEST(Stft, MoyalIdentity) {
  const Grid g(1, 128, 8.0);
  const Window w = gaussian_window(g, 1.3);
  const WaveFunction f = bump(g);
  NormSpec m22;
  m22.p = m22.q = 2.0;
  EXPECT_NEAR(mod_norm(f, m22, w), l2_norm(f), 1e-8 * l2_norm(f));

  const WaveFunction f2 = gaussian(g, 0.7, v1(-1.0), v1(0.4));
  const cplx lhs = gram_pairing(stft(f, w), stft(f2, w));
  EXPECT_LT(std::abs(lhs - inner(f, f2)), 1e-10);
}

TEST(Stft, ShiftCovariance) {
  const Grid g(1, 64, 4.0);
  const Window w = gaussian_window(g);
  const WaveFunction f = gaussian(g, 0.8, v1(0.0), v1(0.0));
  const WaveFunction fs = gaussian(g, 0.8, v1(4 * g.spacing()), v1(0.0));
  const STFTGram a = stft(f, w), b = stft(fs, w);
  double worst = 0.0;
  for (Index r = 0; r + 4 < 64; ++r)
    for (Index c = 0; c < a.values.cols(); ++c)
      worst = std::max(worst, std::abs(std::abs(a.values(r, c)) - std::abs(b.values(r + 4, c))));
  EXPECT_LT(worst, 1e-14);
}

TEST(Stft, SubLatticeAndGuards) {
  const Grid g(1, 64, 4.0);
  const Window w = gaussian_window(g);
  const STFTGram v = stft(w.sampled, w, StftLattice{4, 16});
  EXPECT_EQ(v.values.rows(), 16);
  EXPECT_EQ(v.values.cols(), 16);
  EXPECT_THROW(stft(w.sampled, w, StftLattice{3, 16}), std::invalid_argument);
  EXPECT_THROW(stft(w.sampled, w, StftLattice{1, 7}), std::invalid_argument);
}

TEST(Norms, FourierLebesgueOfGaussian) {
  const Grid g(1, 256, 12.0);
  NormSpec fl;
  fl.flavor = NormFlavor::fourier_lebesgue;
  EXPECT_NEAR(mod_norm(standard_gaussian(g), fl, gaussian_window(g)), std::pow(2.0, 0.25), 1e-6);
  fl.s = 60;
  EXPECT_THROW(mod_norm(standard_gaussian(g), fl, gaussian_window(g)), std::invalid_argument);
}

TEST(Norms, WeightsIncreaseNorms) {
  const Grid g(1, 64, 4.0);
  const Window w = gaussian_window(g);
  const WaveFunction f = gaussian(g, 1.0, v1(0.0), v1(2.0));
  NormSpec a, b;
  b.s = 2.0;
  EXPECT_GT(mod_norm(f, b, w), mod_norm(f, a, w));
  NormSpec inf;
  inf.p = inf.q = kInf;
  const STFTGram v = stft(f, w);
  EXPECT_NEAR(mod_norm(f, inf, w), v.values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Wigner, GaussianClosedFormAndMarginal) {
  const Grid g(1, 128, 8.0);
  const WaveFunction s = standard_gaussian(g);
  const Eigen::MatrixXcd w = wigner(s, s);
  double worst = 0.0;
  for (int m = 0; m < 128; ++m)
    for (int k = 0; k < 128; ++k) {
      const double x = g.node(m), xi = g.frequency(k);
      worst = std::max(worst, std::abs(w(m, k) - 2.0 * std::exp(-kTwoPi * (x * x + xi * xi))));
    }
  EXPECT_LT(worst, 1e-6);

  const WaveFunction f = bump(g);
  const Eigen::MatrixXcd wf = wigner(f, f);
  EXPECT_LT(wf.imag().cwiseAbs().maxCoeff(), 1e-12);
  for (int m = 0; m < 128; m += 9)
    EXPECT_NEAR((g.freq_spacing() * wf.row(m).sum()).real(), std::norm(f.values[m]), 1e-12);
}

TEST(Weyl, ConstantSymbolIsIdentity) {
  const Grid g(1, 128, 8.0);
  const WaveFunction f = bump(g);
  const WaveFunction out = weyl_apply(symbol(g, [](double, double) { return cplx(1.0); }), f);
  EXPECT_LT((out.values - f.values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Weyl, PureSymbols) {
  const Grid g(1, 128, 8.0);
  const WaveFunction f = sample(g, [](const Eigen::VectorXd& x) { return cplx(std::exp(-kPi * x[0] * x[0])); });
  // xi^2 -> -(1 / 4 pi^2) d^2/dx^2
  const WaveFunction lap = weyl_apply(symbol(g, [](double, double xi) { return cplx(xi * xi); }), f);
  const WaveFunction mult = weyl_apply(symbol(g, [](double x, double) { return cplx(std::cos(kTwoPi * x)); }), f);
  for (int j = 0; j < 128; ++j) {
    const double x = g.node(j), e = std::exp(-kPi * x * x);
    EXPECT_NEAR(std::abs(lap.values[j] - (-(4 * kPi * kPi * x * x - kTwoPi) * e / (4 * kPi * kPi))), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(mult.values[j] - std::cos(kTwoPi * x) * e), 0.0, 1e-8);
  }
}

TEST(Weyl, DualPairingWithWigner) {
  // <sigma^w f, g> = <sigma, W(g, f)> for a real-valued symbol.
  const Grid g(1, 64, 4.0);
  const WaveFunction f = bump(g);
  const WaveFunction h = gaussian(g, 0.9, v1(0.3), v1(-0.5));
  const Eigen::MatrixXcd s = symbol(g, [](double x, double xi) { return cplx(std::exp(-x * x - xi * xi)); });
  const cplx lhs = inner(weyl_apply(s, f), h);
  const Eigen::MatrixXcd w = wigner(h, f);
  const cplx rhs = g.spacing() * g.freq_spacing() * (s.array() * w.conjugate().array()).sum();
  EXPECT_LT(std::abs(lhs - rhs), 1e-10);
}

TEST(WeakStar, DirectAndStftRoutesAgree) {
  const Grid g(1, 64, 5.0);
  QuadraticHamiltonian h = harmonic_oscillator(1);
  h.potential = Potential::cosine(1.0, v1(1.0));
  const SampledKernel k = trotter_propagator(h, 1.0, 8, g);
  KernelAtom a{v1(0.5), v1(0.0), v1(-0.5), v1(0.5), 1.0};
  EXPECT_LT(std::abs(weakstar_pairing(k, a) - weakstar_pairing_stft(k, a, 20.0)), 1e-6);
}

TEST(WeakStar, ReflectionPairingOfEvenAtom) {
  const Grid g(1, 128, 8.0);
  const auto d = std::get<ReflectionDescriptor>(mehler_kernel(kPi, g));
  KernelAtom a{v1(0.0), v1(0.0), v1(0.0), v1(0.0), 1.0};
  EXPECT_NEAR(std::abs(weakstar_pairing(d, a, g)), 1.0, 1e-10);
}

TEST(WeakStar, ReflectionPairingMatchesFineKernelLimit) {
  // The delta pairing equals the limit of the grid pairing against U(pi) applied to the atom.
  const Grid g(1, 128, 8.0);
  const auto d = std::get<ReflectionDescriptor>(mehler_kernel(kPi, g));
  const SampledKernel u = eigensolver_reference(harmonic_oscillator(1), kPi, g);
  KernelAtom a{v1(0.5), v1(0.5), v1(-0.5), v1(-0.5), 1.0};
  EXPECT_LT(std::abs(weakstar_pairing(d, a, g) - weakstar_pairing(u, a)), 1e-8);
}

TEST(AlmostDiagonal, CosineSymbolDecaysFast) {
  EXPECT_THROW(almost_diag_gram(Eigen::MatrixXcd::Ones(128, 128), Grid(1, 128, 8.0), gaussian_window(Grid(1, 128, 8.0))),
               ResolutionError);
  const Grid g(1, 256, 8.0);
  const Eigen::MatrixXcd s = symbol(g, [](double x, double) { return cplx(std::cos(kTwoPi * x)); });
  const DecayReport r = almost_diag_gram(s, g, gaussian_window(g));
  EXPECT_GT(r.fitted_s, 10.0);
  EXPECT_GT(r.fitted_c, 0.0);
  EXPECT_FALSE(r.envelope.empty());
}
