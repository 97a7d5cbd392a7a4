#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace ftlab::detail {

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int rank, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, rank, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    const std::size_t len = rank == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
    std::vector<fftw_complex> scratch(len);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = rank == 1 ? fftw_plan_dft_1d(n, scratch.data(), scratch.data(), sign, flags)
                            : fftw_plan_dft_2d(n, n, scratch.data(), scratch.data(), sign, flags);
    if (!p) throw Error("fftw plan creation failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft_inplace(cplx* data, int n, int rank, int sign) {
  if (rank != 1 && rank != 2) throw std::invalid_argument("fft rank must be 1 or 2");
  fftw_plan p = cache().get(n, rank, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
}

}  // namespace ftlab::detail
