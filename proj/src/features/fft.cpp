#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace spoofbench::features::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanCache {
  std::map<std::size_t, fftw_plan> r2c;
  std::map<std::size_t, fftw_plan> c2c_backward;
  ~PlanCache() {
    for (auto& [n, p] : r2c) fftw_destroy_plan(p);
    for (auto& [n, p] : c2c_backward) fftw_destroy_plan(p);
  }
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_plan r2c_plan(std::size_t n) {
  std::lock_guard lock(planner_mutex());
  auto& cache = plans().r2c;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                     reinterpret_cast<fftw_complex*>(out.data()), kFlags);
  cache.emplace(n, p);
  return p;
}

fftw_plan c2c_backward_plan(std::size_t n) {
  std::lock_guard lock(planner_mutex());
  auto& cache = plans().c2c_backward;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<std::complex<double>> buf(n);
  auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, kFlags);
  cache.emplace(n, p);
  return p;
}

}  // namespace

void rfft(const double* in, std::complex<double>* out, std::size_t n) {
  fftw_execute_dft_r2c(r2c_plan(n), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void ifft_inplace(std::complex<double>* data, std::size_t n) {
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(c2c_backward_plan(n), raw, raw);
}

std::size_t next_smooth(std::size_t n) {
  if (n <= 1) return 1;
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t p2 = 1; p2 < 2 * n; p2 *= 2) {
    for (std::size_t p3 = p2; p3 < 2 * n; p3 *= 3) {
      for (std::size_t p5 = p3; p5 < 2 * n; p5 *= 5) {
        if (p5 >= n && p5 < best) best = p5;
      }
    }
  }
  return best;
}

}  // namespace spoofbench::features::detail
