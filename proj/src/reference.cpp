#include "rppg/reference.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace rppg::ref {

std::vector<double> dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                         static_cast<double>(n);
      re += (x[i] - mean) * std::cos(ang);
      im += (x[i] - mean) * std::sin(ang);
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

double snr_db(const std::vector<double>& x, double fps, const PipelineConfig& cfg) {
  const std::vector<double> mag = dft_magnitude(x);
  const std::size_t n = x.size();

  std::vector<std::size_t> band;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f_bpm = 60.0 * static_cast<double>(k) * fps / static_cast<double>(n);
    if (f_bpm >= cfg.snr_band_bpm[0] && f_bpm <= cfg.snr_band_bpm[1]) band.push_back(k);
  }
  if (band.empty()) throw std::runtime_error("ref::snr_db: empty band");

  double max_mag = 0.0;
  std::size_t peak = band[0];
  for (std::size_t k : band)
    if (mag[k] > max_mag) {
      max_mag = mag[k];
      peak = k;
    }
  if (max_mag <= 0.0) throw std::runtime_error("ref::snr_db: all-zero signal");

  const double peak_bpm = 60.0 * static_cast<double>(peak) * fps / static_cast<double>(n);
  double inside = 0.0, outside = 0.0;
  for (std::size_t k : band) {
    const double s = mag[k] / max_mag;
    const double f_bpm = 60.0 * static_cast<double>(k) * fps / static_cast<double>(n);
    if (f_bpm >= peak_bpm && f_bpm <= peak_bpm + cfg.snr_window_bpm + 1e-9)
      inside += s * s;
    else
      outside += s * s;
  }
  if (outside <= inside * 1e-12) return 120.0;
  return 10.0 * std::log10(inside / outside);
}

std::vector<double> denoise_literal(std::vector<double> signal, double threshold) {
  std::vector<double> out;
  out.push_back(signal.at(0));
  std::size_t i = 0;
  while (i < signal.size() - 1) {
    const double diff = signal[i + 1] - signal[i];
    if (std::abs(diff) > threshold) {
      for (std::size_t j = i + 1; j < signal.size(); ++j) signal[j] -= diff;
    } else {
      out.push_back(signal[i + 1]);
      ++i;
    }
  }
  return out;
}

std::vector<double> detrend_dense(const std::vector<double>& z, double lambda) {
  const std::size_t n = z.size();
  if (n < 3) throw std::runtime_error("ref::detrend_dense: too short");

  // D2 as an explicit (n-2) x n matrix.
  std::vector<std::vector<double>> d2(n - 2, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n - 2; ++r) {
    d2[r][r] = 1.0;
    d2[r][r + 1] = -2.0;
    d2[r][r + 2] = 1.0;
  }

  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  for (std::size_t r = 0; r < n - 2; ++r)
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[r][i] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        m[i][j] += lambda * lambda * d2[r][i] * d2[r][j];
    }

  // Gauss-Jordan inversion with partial pivoting.
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = m[col][col];
    if (d == 0.0) throw std::runtime_error("ref::detrend_dense: singular matrix");
    for (std::size_t j = 0; j < n; ++j) {
      m[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double yi = 0.0;
    for (std::size_t j = 0; j < n; ++j) yi += inv[i][j] * z[j];
    out[i] = z[i] - yi;
  }
  return out;
}

Psd welch_naive(const std::vector<double>& x, double fps, const PipelineConfig& cfg) {
  const std::size_t n = x.size();
  std::size_t nperseg = std::min<std::size_t>(static_cast<std::size_t>(cfg.welch_segment_len), n);
  const std::size_t noverlap =
      static_cast<std::size_t>(std::floor(static_cast<double>(nperseg) * cfg.welch_overlap));
  const std::size_t hop = nperseg > noverlap ? nperseg - noverlap : 1;
  std::size_t nfft = 1;
  while (nfft < std::max<std::size_t>(static_cast<std::size_t>(cfg.welch_fft_len), nperseg))
    nfft <<= 1;
  const std::size_t nbins = nfft / 2 + 1;

  std::vector<double> window(nperseg);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < nperseg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(nperseg));
    win_sq += window[i] * window[i];
  }

  std::vector<double> power(nbins, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + nperseg <= n; start += hop, ++segments) {
    double seg_mean = 0.0;
    for (std::size_t i = 0; i < nperseg; ++i) seg_mean += x[start + i];
    seg_mean /= static_cast<double>(nperseg);

    std::vector<double> seg(nperseg);
    for (std::size_t i = 0; i < nperseg; ++i) seg[i] = (x[start + i] - seg_mean) * window[i];

    for (std::size_t k = 0; k < nbins; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < nperseg; ++i) {
        const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                           static_cast<double>(nfft);
        re += seg[i] * std::cos(ang);
        im += seg[i] * std::sin(ang);
      }
      double v = (re * re + im * im) / (fps * win_sq);
      if (k != 0 && k != nfft / 2) v *= 2.0;
      power[k] += v;
    }
  }
  if (segments == 0) throw std::runtime_error("ref::welch_naive: no full segment");
  for (double& v : power) v /= static_cast<double>(segments);

  std::vector<double> freqs(nbins);
  for (std::size_t k = 0; k < nbins; ++k)
    freqs[k] = static_cast<double>(k) * fps / static_cast<double>(nfft);
  return Psd{std::move(freqs), std::move(power)};
}

ChannelMeans masked_means_naive(const Image& frame, const Mask& mask) {
  double sr = 0.0, sg = 0.0, sb = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!mask.bits[static_cast<std::size_t>(y) * mask.width + x]) continue;
      const std::uint8_t* px = frame.at(x, y);
      sr += px[0];
      sg += px[1];
      sb += px[2];
      ++count;
    }
  }
  if (count == 0) throw std::runtime_error("ref::masked_means_naive: empty mask");
  const double inv = 1.0 / static_cast<double>(count);
  return ChannelMeans{sr * inv, sg * inv, sb * inv};
}

}  // namespace rppg::ref
