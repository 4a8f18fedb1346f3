#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace spoofbench::features::detail {

// Thin wrappers over cached FFTW plans. Plans are created once per size
// under a global lock and executed through the thread-safe new-array API.
void rfft(const double* in, std::complex<double>* out, std::size_t n);
// Unnormalized inverse (sign +1) complex transform, in place.
void ifft_inplace(std::complex<double>* data, std::size_t n);

// Smallest 2^a 3^b 5^c >= n.
std::size_t next_smooth(std::size_t n);

}  // namespace spoofbench::features::detail
