#include "layers.hpp"

#include <cmath>

namespace spoofbench::models::detail {
namespace {

double to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

SincBankImpl::SincBankImpl(std::int64_t n_filters, std::int64_t kernel, double sample_rate) {
  if (kernel % 2 == 0) ++kernel;
  // Cutoffs evenly spaced on the mel scale between the 0 Hz and Nyquist bins
  // of a 512-point grid.
  const double mel_lo = to_mel(0.0);
  const double mel_hi = to_mel(std::floor(sample_rate / 2.0));
  std::vector<double> edges(n_filters + 1);
  for (std::int64_t i = 0; i <= n_filters; ++i) {
    edges[i] = to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / n_filters);
  }
  auto bank = torch::zeros({n_filters, 1, kernel}, torch::kFloat32);
  auto acc = bank.accessor<float, 3>();
  const double half = (kernel - 1) / 2.0;
  for (std::int64_t f = 0; f < n_filters; ++f) {
    const double lo = edges[f];
    const double hi = edges[f + 1];
    for (std::int64_t k = 0; k < kernel; ++k) {
      const double t = static_cast<double>(k) - half;
      const double ideal = 2.0 * hi / sample_rate * sinc(2.0 * hi * t / sample_rate) -
                           2.0 * lo / sample_rate * sinc(2.0 * lo * t / sample_rate);
      const double hamming = 0.54 - 0.46 * std::cos(2.0 * M_PI * k / (kernel - 1));
      acc[f][0][k] = static_cast<float>(hamming * ideal);
    }
  }
  filters = register_buffer("filters", bank);
}

torch::Tensor repeat_to(const torch::Tensor& x, std::int64_t n) {
  const auto t = x.size(-1);
  if (t >= n) return x.narrow(-1, 0, n);
  const auto reps = (n + t - 1) / t;
  std::vector<std::int64_t> r(x.dim(), 1);
  r.back() = reps;
  return x.repeat(r).narrow(-1, 0, n);
}

}  // namespace spoofbench::models::detail
