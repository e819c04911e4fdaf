#include "rppg/spectral.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rppg {

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse) {
  const std::size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_inplace: size not a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = buf[i + k];
        const std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& c : buf) c /= static_cast<double>(n);
  }
}

std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("magnitude_spectrum: empty input");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;

  const std::size_t nbins = n / 2 + 1;
  std::vector<double> mag(nbins, 0.0);
  const double w0 = -2.0 * M_PI / static_cast<double>(n);

  // Each bin is independent; direct evaluation keeps arbitrary lengths exact.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long kk = 0; kk < static_cast<long long>(nbins); ++kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = w0 * static_cast<double>(k) * static_cast<double>(i);
      re += centered[i] * std::cos(ang);
      im += centered[i] * std::sin(ang);
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

}  // namespace rppg
