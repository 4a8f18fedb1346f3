#pragma once

// Building blocks behind extract(); exposed for tests and tools.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spoofbench::features {

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Centered STFT magnitudes (reflection padding of fft_size/2 on each side).
// Result is (fft_size/2 + 1) x (1 + n/hop), row-major by bin.
std::vector<double> stft_magnitude(std::span<const float> samples, std::size_t fft_size,
                                   std::size_t hop, std::span<const double> window);

// Slaney-style mel filterbank with area normalization,
// n_filters x (fft_size/2 + 1), row-major.
std::vector<double> mel_filterbank(std::size_t n_filters, std::size_t fft_size,
                                   double sample_rate, double fmin, double fmax);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Constant-Q magnitude transform with Hann-windowed complex kernels.
// Bin k is centred at min(fmin * 2^(k/bpo), sample_rate/2); the kernel of
// bin k spans ceil(Q * sample_rate / f_k) samples with
// Q = 1 / (2^(1/bpo) - 1). Frame m is centred on sample m * hop with zero
// padding outside the clip. Result is n_bins x (1 + n/hop), row-major.
struct CqtParams {
  std::size_t n_bins = 513;
  std::size_t bins_per_octave = 64;
  double fmin = 32.7;
  double sample_rate = 16000.0;
  std::size_t hop = 256;
};

std::vector<double> cqt_magnitude(std::span<const float> samples, const CqtParams& params);

// Direct time-domain evaluation of a single CQT coefficient; slow, used as a
// cross-check.
std::complex<double> cqt_coefficient_direct(std::span<const float> samples,
                                            const CqtParams& params, std::size_t bin,
                                            std::size_t frame);

std::vector<double> cqt_frequencies(const CqtParams& params);

}  // namespace spoofbench::features
