#include <benchmark/benchmark.h>

#include "ftlab/experiments.hpp"

using namespace ftlab;

namespace {

QuadraticHamiltonian harmonic_cosine() {
  QuadraticHamiltonian h = harmonic_oscillator(1);
  h.potential = Potential::cosine(1.0, Eigen::VectorXd::Constant(1, 1.0));
  return h;
}

void BM_Dft(benchmark::State& st) {
  const Grid g(1, int(st.range(0)), 12.0);
  const WaveFunction f = standard_gaussian(g);
  for (auto _ : st) benchmark::DoNotOptimize(dft(f));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Dft)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Dft2d(benchmark::State& st) {
  const Grid g(2, int(st.range(0)), 6.0);
  const WaveFunction f = standard_gaussian(g);
  for (auto _ : st) benchmark::DoNotOptimize(dft(f));
}
BENCHMARK(BM_Dft2d)->Arg(64)->Arg(256);

void BM_EigensolverKernel(benchmark::State& st) {
  const Grid g(1, int(st.range(0)), 12.0);
  const auto h = harmonic_cosine();
  for (auto _ : st) benchmark::DoNotOptimize(eigensolver_reference(h, 1.0, g));
}
BENCHMARK(BM_EigensolverKernel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TrotterKernel(benchmark::State& st) {
  const Grid g(1, 256, 12.0);
  const TrotterPropagator tp(harmonic_cosine(), g);
  tp.free_propagator().prepare();
  for (auto _ : st) benchmark::DoNotOptimize(tp.kernel(1.0, int(st.range(0))));
}
BENCHMARK(BM_TrotterKernel)->Arg(8)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TrotterApply(benchmark::State& st) {
  const Grid g(1, 1024, 12.0);
  QuadraticHamiltonian h = free_particle(1);
  h.potential = Potential::cosine(1.0, Eigen::VectorXd::Constant(1, 1.0));
  const TrotterPropagator tp(h, g);
  const Eigen::VectorXcd v = standard_gaussian(g).values;
  for (auto _ : st) benchmark::DoNotOptimize(tp.apply(1.0, int(st.range(0)), v));
}
BENCHMARK(BM_TrotterApply)->Arg(16)->Arg(128);

void BM_MetaplecticKernel(benchmark::State& st) {
  const Grid g(1, int(st.range(0)), 12.0);
  for (auto _ : st) benchmark::DoNotOptimize(metaplectic_kernel(free_particle(1), 1.0, g));
}
BENCHMARK(BM_MetaplecticKernel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& st) {
  const Grid g(1, int(st.range(0)), 12.0);
  const Window w = gaussian_window(g);
  const WaveFunction f = standard_gaussian(g);
  for (auto _ : st) benchmark::DoNotOptimize(stft(f, w));
}
BENCHMARK(BM_Stft)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_StftKernelSubLattice(benchmark::State& st) {
  const Grid g(1, 128, 8.0);
  const SampledKernel k = trotter_propagator(harmonic_cosine(), 1.0, 8, g);
  const WaveFunction kf = kernel_as_function(k);
  const Window w = gaussian_window(kf.grid);
  for (auto _ : st) benchmark::DoNotOptimize(stft(kf, w, StftLattice{8, 64}));
}
BENCHMARK(BM_StftKernelSubLattice)->Unit(benchmark::kMillisecond);

void BM_Wigner(benchmark::State& st) {
  const Grid g(1, int(st.range(0)), 8.0);
  const WaveFunction f = standard_gaussian(g);
  for (auto _ : st) benchmark::DoNotOptimize(wigner(f, f));
}
BENCHMARK(BM_Wigner)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
