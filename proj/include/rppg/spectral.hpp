#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rppg {

// In-place iterative radix-2 transform. size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse = false);

std::size_t next_power_of_two(std::size_t n);

// |X_k| for k = 0..N/2 of the mean-removed input, computed bin by bin.
// Parallelized over output bins when OpenMP is enabled.
std::vector<double> magnitude_spectrum(const std::vector<double>& x);

// Frequency of bin k for a length-n transform sampled at fs.
inline double bin_freq(std::size_t k, std::size_t n, double fs) {
  return static_cast<double>(k) * fs / static_cast<double>(n);
}

}  // namespace rppg
