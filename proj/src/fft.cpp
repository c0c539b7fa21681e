#include "rabi/fft.hpp"

#include <map>
#include <mutex>

#include <fftw3.h>

namespace rabi::fft {
namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex plan_mutex;

struct PlanCache {
  std::map<std::size_t, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [n, plan] : plans) fftw_destroy_plan(plan);
  }
};

fftw_plan plan_for(std::size_t n, fftw_complex* data) {
  static PlanCache cache;
  std::lock_guard lock(plan_mutex);
  auto it = cache.plans.find(n);
  if (it != cache.plans.end()) return it->second;
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.plans.emplace(n, plan);
  return plan;
}

}  // namespace

void forward(std::span<std::complex<double>> data) {
  if (data.empty()) return;
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(data.size(), raw), raw, raw);
}

}  // namespace rabi::fft
