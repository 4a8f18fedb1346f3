#include "spoofbench/features/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "fft.hpp"
#include "spoofbench/common/error.hpp"

namespace spoofbench::features {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

std::vector<double> stft_magnitude(std::span<const float> samples, std::size_t fft_size,
                                   std::size_t hop, std::span<const double> window) {
  const std::size_t n = samples.size();
  const std::size_t pad = fft_size / 2;
  if (n <= pad) throw Error("stft: signal too short for reflection padding");
  if (window.size() != fft_size) throw Error("stft: window length differs from fft size");
  const std::size_t frames = 1 + n / hop;
  const std::size_t bins = fft_size / 2 + 1;

  auto reflect = [&](std::ptrdiff_t j) -> double {
    const auto len = static_cast<std::ptrdiff_t>(n);
    while (j < 0 || j >= len) j = j < 0 ? -j : 2 * (len - 1) - j;
    return samples[static_cast<std::size_t>(j)];
  };

  std::vector<double> out(bins * frames);
  std::vector<double> frame(fft_size);
  std::vector<std::complex<double>> spec(bins);
  for (std::size_t m = 0; m < frames; ++m) {
    const auto start = static_cast<std::ptrdiff_t>(m * hop) - static_cast<std::ptrdiff_t>(pad);
    for (std::size_t i = 0; i < fft_size; ++i) {
      frame[i] = reflect(start + static_cast<std::ptrdiff_t>(i)) * window[i];
    }
    detail::rfft(frame.data(), spec.data(), fft_size);
    for (std::size_t b = 0; b < bins; ++b) out[b * frames + m] = std::abs(spec[b]);
  }
  return out;
}

double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

std::vector<double> mel_filterbank(std::size_t n_filters, std::size_t fft_size,
                                   double sample_rate, double fmin, double fmax) {
  const std::size_t bins = fft_size / 2 + 1;
  std::vector<double> edges(n_filters + 2);
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_filters + 1));
  }
  std::vector<double> weights(n_filters * bins, 0.0);
  for (std::size_t f = 0; f < n_filters; ++f) {
    const double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    const double norm = 2.0 / (hi - lo);
    for (std::size_t b = 0; b < bins; ++b) {
      const double hz = sample_rate * b / fft_size;
      const double rise = (hz - lo) / (mid - lo);
      const double fall = (hi - hz) / (hi - mid);
      weights[f * bins + b] = std::max(0.0, std::min(rise, fall)) * norm;
    }
  }
  return weights;
}

// ---------------------------------------------------------------------------
// Constant-Q transform

namespace {

// Half-width of the retained kernel spectrum in units of N/L bins.
constexpr double kBandLobes = 32.0;

double cqt_q(std::size_t bins_per_octave) {
  return 1.0 / (std::pow(2.0, 1.0 / bins_per_octave) - 1.0);
}

std::size_t kernel_length(const CqtParams& p, double freq) {
  return static_cast<std::size_t>(std::ceil(cqt_q(p.bins_per_octave) * p.sample_rate / freq));
}

// D(phi) = sum_{i<L} exp(-i phi i)
std::complex<double> dirichlet(double phi, std::size_t length) {
  const double L = static_cast<double>(length);
  const double s = std::sin(phi / 2.0);
  double ratio;
  if (std::abs(s) < 1e-12) {
    ratio = L;
  } else {
    ratio = std::sin(L * phi / 2.0) / s;
  }
  return std::polar(ratio, -phi * (L - 1.0) / 2.0);
}

struct SparseKernel {
  std::ptrdiff_t first_bin = 0;               // signed FFT index of values[0]
  std::vector<std::complex<double>> values;   // G(j), already divided by N
};

struct KernelBank {
  std::size_t fft_len = 0;
  std::vector<SparseKernel> kernels;
};

KernelBank build_bank(const CqtParams& p, std::size_t fft_len) {
  KernelBank bank;
  bank.fft_len = fft_len;
  const auto freqs = cqt_frequencies(p);
  const double N = static_cast<double>(fft_len);
  for (double f : freqs) {
    const std::size_t L = kernel_length(p, f);
    const double h = std::floor(L / 2.0);
    const double S = L / 2.0;  // sum of the periodic Hann window
    const double centre = f * N / p.sample_rate;
    const auto width = static_cast<std::ptrdiff_t>(std::ceil(kBandLobes * N / L)) + 2;
    SparseKernel k;
    k.first_bin = static_cast<std::ptrdiff_t>(std::floor(centre)) - width;
    const auto last = static_cast<std::ptrdiff_t>(std::ceil(centre)) + width;
    const double step = 2.0 * M_PI / L;
    for (std::ptrdiff_t j = k.first_bin; j <= last; ++j) {
      const double theta = 2.0 * M_PI * (f / p.sample_rate - j / N);
      const std::complex<double> sum = 0.5 * dirichlet(theta, L) -
                                       0.25 * dirichlet(theta - step, L) -
                                       0.25 * dirichlet(theta + step, L);
      k.values.push_back(std::polar(1.0, theta * h) * sum / (S * N));
    }
    bank.kernels.push_back(std::move(k));
  }
  return bank;
}

struct BankKey {
  std::size_t n_bins, bpo, hop, fft_len;
  double fmin, rate;
  auto operator<=>(const BankKey&) const = default;
};

std::shared_ptr<const KernelBank> kernel_bank(const CqtParams& p, std::size_t fft_len) {
  static std::mutex mutex;
  static std::map<BankKey, std::shared_ptr<const KernelBank>> cache;
  const BankKey key{p.n_bins, p.bins_per_octave, p.hop, fft_len, p.fmin, p.sample_rate};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto bank = std::make_shared<const KernelBank>(build_bank(p, fft_len));
  std::lock_guard lock(mutex);
  if (cache.size() >= 8) cache.clear();
  return cache.emplace(key, std::move(bank)).first->second;
}

}  // namespace

std::vector<double> cqt_frequencies(const CqtParams& p) {
  std::vector<double> f(p.n_bins);
  const double nyquist = p.sample_rate / 2.0;
  for (std::size_t k = 0; k < p.n_bins; ++k) {
    f[k] = std::min(p.fmin * std::pow(2.0, static_cast<double>(k) / p.bins_per_octave), nyquist);
  }
  return f;
}

std::vector<double> cqt_magnitude(std::span<const float> samples, const CqtParams& p) {
  if (p.hop == 0 || p.n_bins == 0 || p.fmin <= 0.0) throw Error("cqt: invalid parameters");
  const std::size_t n = samples.size();
  const std::size_t frames = 1 + n / p.hop;
  const std::size_t longest = kernel_length(p, p.fmin);
  const std::size_t pad_frames = (longest / 2 + p.hop) / p.hop + 1;
  const std::size_t pad = pad_frames * p.hop;
  const std::size_t grid = detail::next_smooth((n + 2 * pad + p.hop - 1) / p.hop);
  const std::size_t fft_len = grid * p.hop;

  std::vector<double> padded(fft_len, 0.0);
  std::copy(samples.begin(), samples.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
  std::vector<std::complex<double>> spectrum(fft_len / 2 + 1);
  detail::rfft(padded.data(), spectrum.data(), fft_len);

  const auto N = static_cast<std::ptrdiff_t>(fft_len);
  auto bin_value = [&](std::ptrdiff_t j) {
    j %= N;
    if (j < 0) j += N;
    return j <= N / 2 ? spectrum[static_cast<std::size_t>(j)]
                      : std::conj(spectrum[static_cast<std::size_t>(N - j)]);
  };

  const auto bank = kernel_bank(p, fft_len);
  std::vector<double> out(p.n_bins * frames);
  std::vector<std::complex<double>> folded(grid);
  const auto M = static_cast<std::ptrdiff_t>(grid);
  for (std::size_t k = 0; k < p.n_bins; ++k) {
    std::fill(folded.begin(), folded.end(), std::complex<double>{});
    const auto& kernel = bank->kernels[k];
    for (std::size_t i = 0; i < kernel.values.size(); ++i) {
      const std::ptrdiff_t j = kernel.first_bin + static_cast<std::ptrdiff_t>(i);
      std::ptrdiff_t r = j % M;
      if (r < 0) r += M;
      folded[static_cast<std::size_t>(r)] += bin_value(j) * kernel.values[i];
    }
    detail::ifft_inplace(folded.data(), grid);
    for (std::size_t m = 0; m < frames; ++m) {
      out[k * frames + m] = std::abs(folded[pad_frames + m]);
    }
  }
  return out;
}

std::complex<double> cqt_coefficient_direct(std::span<const float> samples, const CqtParams& p,
                                            std::size_t bin, std::size_t frame) {
  const double f = cqt_frequencies(p)[bin];
  const std::size_t L = kernel_length(p, f);
  const auto h = static_cast<std::ptrdiff_t>(L / 2);
  const auto centre = static_cast<std::ptrdiff_t>(frame * p.hop);
  std::complex<double> acc{};
  for (std::size_t i = 0; i < L; ++i) {
    const std::ptrdiff_t idx = centre - h + static_cast<std::ptrdiff_t>(i);
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(samples.size())) continue;
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / L);
    const double n = static_cast<double>(static_cast<std::ptrdiff_t>(i) - h);
    acc += samples[static_cast<std::size_t>(idx)] * w *
           std::polar(1.0, -2.0 * M_PI * f * n / p.sample_rate);
  }
  return acc / (L / 2.0);
}

}  // namespace spoofbench::features
