#include <algorithm>
#include <cmath>
#include <numeric>

#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::dataio {
namespace {

constexpr double kZeroCrossings = 16.0;
constexpr double kRolloff = 0.97;
constexpr double kKaiserBeta = 8.6;

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

std::vector<float> resample(std::span<const float> input, int from_rate,
                            int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw Error("sample rates must be positive");
  if (from_rate == to_rate) return {input.begin(), input.end()};
  const long g = std::gcd(from_rate, to_rate);
  const long up = to_rate / g;
  const long down = from_rate / g;

  // Cutoff in cycles per input sample; below the lower of the two Nyquists.
  const double fc = 0.5 * std::min(1.0, static_cast<double>(up) / down) * kRolloff;
  const long half = static_cast<long>(std::ceil(kZeroCrossings / (2.0 * fc)));
  const long taps = 2 * half + 1;
  const double norm = bessel_i0(kKaiserBeta);

  // table[p][k] weights input sample (base - half + k) for phase p.
  std::vector<double> table(static_cast<std::size_t>(up * taps));
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    for (long k = 0; k < taps; ++k) {
      const double t = static_cast<double>(k - half) - frac;
      const double r = t / (half + 1);
      const double w = std::abs(r) >= 1.0 ? 0.0 : bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
      table[p * taps + k] = 2.0 * fc * sinc(2.0 * fc * t) * w;
    }
  }

  const long n_in = static_cast<long>(input.size());
  const long n_out = (n_in * up + down - 1) / down;
  std::vector<float> out(static_cast<std::size_t>(n_out));
  for (long i = 0; i < n_out; ++i) {
    const long num = i * down;
    const long base = num / up;
    const long phase = num % up;
    const double* h = &table[phase * taps];
    double acc = 0.0;
    const long k0 = std::max(0L, half - base);
    const long k1 = std::min(taps, n_in - base + half);
    for (long k = k0; k < k1; ++k) acc += h[k] * input[base - half + k];
    out[i] = static_cast<float>(std::clamp(acc, -1.0, 1.0));
  }
  return out;
}

}  // namespace spoofbench::dataio
