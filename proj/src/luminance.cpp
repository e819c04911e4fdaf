#include "rppg/luminance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rppg/error.hpp"

namespace rppg {

namespace {

// numpy-style linear-interpolation percentile of a sorted sample.
double percentile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q / 100.0 * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<double> luma_plane(const Image& frame) {
  std::vector<double> y(frame.pixel_count());
  const std::uint8_t* p = frame.pixels.data();
  for (std::size_t i = 0; i < y.size(); ++i, p += 3) y[i] = luma(p[0], p[1], p[2]);
  return y;
}

double median_contrast_ratio(const std::vector<FrameStats>& stats) {
  std::vector<double> ratios(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i)
    ratios[i] = (stats[i].p99_gray - stats[i].p1_gray) / 255.0;
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  return (n % 2 == 1) ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
}

double overall_mean_gray(const std::vector<FrameStats>& stats) {
  double sum = 0.0;
  for (const auto& s : stats) sum += s.mean_gray;
  return sum / static_cast<double>(stats.size());
}

bool median_frame_low_contrast(const std::vector<FrameStats>& stats, double threshold) {
  return median_contrast_ratio(stats) < threshold;
}

}  // namespace

FrameStats frame_stats(const Image& frame) {
  if (frame.empty()) throw FormatError("frame_stats: empty image");
  std::vector<double> y = luma_plane(frame);
  double sum = 0.0;
  for (double v : y) sum += v;
  FrameStats s;
  s.mean_gray = sum / static_cast<double>(y.size());
  s.mean_y = s.mean_gray;
  std::sort(y.begin(), y.end());
  s.p1_gray = percentile_sorted(y, 1.0);
  s.p99_gray = percentile_sorted(y, 99.0);
  return s;
}

std::vector<FrameStats> frame_stats_batch(const std::vector<Image>& frames) {
  std::vector<FrameStats> out(frames.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(frames.size()); ++i)
    out[static_cast<std::size_t>(i)] = frame_stats(frames[static_cast<std::size_t>(i)]);
  return out;
}

bool is_low_contrast(const FrameStats& stats, double threshold) {
  return (stats.p99_gray - stats.p1_gray) / 255.0 < threshold;
}

QualityVerdict assess(const std::vector<FrameStats>& stats, double y_var_threshold) {
  if (stats.empty()) throw FormatError("assess: no frames");
  if (median_frame_low_contrast(stats, 0.65)) return QualityVerdict::LowContrast;

  double ymin = stats[0].mean_y, ymax = stats[0].mean_y;
  for (const auto& s : stats) {
    ymin = std::min(ymin, s.mean_y);
    ymax = std::max(ymax, s.mean_y);
  }
  if (ymax - ymin > y_var_threshold) return QualityVerdict::VaryingLight;

  if (overall_mean_gray(stats) < 75.0) return QualityVerdict::Enhanced;
  return QualityVerdict::Good;
}

Image hist_equalize(const Image& frame) {
  if (frame.empty()) throw FormatError("hist_equalize: empty image");
  const std::vector<double> y = luma_plane(frame);

  std::size_t hist[256] = {0};
  for (double v : y) {
    int bin = static_cast<int>(std::lround(v));
    bin = std::clamp(bin, 0, 255);
    ++hist[static_cast<std::size_t>(bin)];
  }

  // CDF remap: level -> round(255 * cdf(level)).
  double lut[256];
  std::size_t cum = 0;
  const double total = static_cast<double>(y.size());
  for (int v = 0; v < 256; ++v) {
    cum += hist[v];
    lut[v] = std::lround(255.0 * static_cast<double>(cum) / total);
  }

  Image out(frame.width, frame.height);
  const std::uint8_t* src = frame.pixels.data();
  std::uint8_t* dst = out.pixels.data();
  for (std::size_t i = 0; i < frame.pixel_count(); ++i, src += 3, dst += 3) {
    const double y_old = y[i];
    if (y_old <= 0.0) {
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      continue;
    }
    const int bin = std::clamp(static_cast<int>(std::lround(y_old)), 0, 255);
    const double scale = lut[bin] / y_old;
    for (int c = 0; c < 3; ++c) {
      const double v = std::lround(src[c] * scale);
      dst[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

QualityVerdict assess_recording(std::vector<Image>& frames, const LuminanceOptions& opt) {
  if (frames.empty()) throw FormatError("assess_recording: no frames");
  const std::vector<FrameStats> stats = frame_stats_batch(frames);

  const bool dark = overall_mean_gray(stats) < opt.dark_mean;
  if (!dark && median_frame_low_contrast(stats, opt.contrast_threshold))
    return QualityVerdict::LowContrast;

  double ymin = stats[0].mean_y, ymax = stats[0].mean_y;
  for (const auto& s : stats) {
    ymin = std::min(ymin, s.mean_y);
    ymax = std::max(ymax, s.mean_y);
  }
  if (ymax - ymin > opt.y_var_threshold) return QualityVerdict::VaryingLight;

  if (!dark) return QualityVerdict::Good;

  std::vector<Image> equalized(frames.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(frames.size()); ++i)
    equalized[static_cast<std::size_t>(i)] = hist_equalize(frames[static_cast<std::size_t>(i)]);

  const std::vector<FrameStats> eq_stats = frame_stats_batch(equalized);
  if (median_frame_low_contrast(eq_stats, opt.contrast_threshold)) return QualityVerdict::TooDark;

  frames = std::move(equalized);
  return QualityVerdict::Enhanced;
}

}  // namespace rppg
