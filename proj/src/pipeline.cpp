#include "rppg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rppg/error.hpp"
#include "rppg/spectral.hpp"

namespace rppg {

namespace {

constexpr double kSnrCapDb = 120.0;  // ratio cap when out-of-window energy vanishes
constexpr int kIcaMaxIter = 500;
constexpr double kIcaTol = 1e-6;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double denom = std::sqrt(saa * sbb);
  return denom > 0.0 ? sab / denom : 0.0;
}

}  // namespace

double snr(const std::vector<double>& samples, double fps, const PipelineConfig& cfg) {
  const std::size_t n = samples.size();
  if (n < 8) throw AnalysisError("snr: signal too short");
  const double band_lo_hz = cfg.snr_band_bpm[0] / 60.0;
  const double band_hi_hz = cfg.snr_band_bpm[1] / 60.0;
  if (!(fps > 2.0 * band_hi_hz)) throw AnalysisError("snr: band not representable at this fps");

  const std::vector<double> mag = magnitude_spectrum(samples);

  // Retained in-band bins.
  std::vector<std::size_t> band;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = bin_freq(k, n, fps);
    if (f >= band_lo_hz && f <= band_hi_hz) band.push_back(k);
  }
  if (band.empty()) throw AnalysisError("snr: band empty at given fps");

  double max_mag = 0.0;
  std::size_t peak = band[0];
  for (std::size_t k : band) {
    if (mag[k] > max_mag) {
      max_mag = mag[k];
      peak = k;
    }
  }
  if (max_mag <= 0.0) throw AnalysisError("snr: all-zero signal");

  const double peak_bpm = 60.0 * bin_freq(peak, n, fps);
  double inside = 0.0, outside = 0.0;
  for (std::size_t k : band) {
    const double s = mag[k] / max_mag;
    const double f_bpm = 60.0 * bin_freq(k, n, fps);
    if (f_bpm >= peak_bpm && f_bpm <= peak_bpm + cfg.snr_window_bpm + 1e-9)
      inside += s * s;
    else
      outside += s * s;
  }
  if (outside <= inside * std::pow(10.0, -kSnrCapDb / 10.0)) return kSnrCapDb;
  return 10.0 * std::log10(inside / outside);
}

double snr(const Bvp& signal, const PipelineConfig& cfg) {
  return snr(signal.samples, signal.fps, cfg);
}

MotionPlan plan_motion_elimination(const std::vector<double>& samples, double fps,
                                   const PipelineConfig& cfg) {
  MotionPlan plan;
  plan.snr_db = snr(samples, fps, cfg);
  if (plan.snr_db >= 0.0) return plan;

  const std::size_t n = samples.size();
  const std::size_t segments = static_cast<std::size_t>(cfg.motion_segments);
  if (n < segments) throw AnalysisError("eliminate_motion: too few samples to form segments");
  const std::size_t base = n / segments;  // remainder goes to the last segment

  std::vector<double> seg_std(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t lo = s * base;
    const std::size_t hi = (s + 1 == segments) ? n : (s + 1) * base;
    std::vector<double> seg(samples.begin() + static_cast<std::ptrdiff_t>(lo),
                            samples.begin() + static_cast<std::ptrdiff_t>(hi));
    seg_std[s] = population_std(seg);
  }

  std::size_t drop = static_cast<std::size_t>(
      std::ceil(cfg.motion_drop_fraction * static_cast<double>(segments)));
  drop = std::min(drop, segments - 1);

  // Highest std dropped first; ties resolved toward the earliest segment.
  std::vector<std::size_t> order(segments);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return seg_std[a] > seg_std[b]; });
  std::vector<bool> dropped(segments, false);
  for (std::size_t i = 0; i < drop; ++i) dropped[order[i]] = true;

  plan.applied = true;
  for (std::size_t s = 0; s < segments; ++s) {
    if (dropped[s]) continue;
    const std::size_t lo = s * base;
    const std::size_t hi = (s + 1 == segments) ? n : (s + 1) * base;
    for (std::size_t i = lo; i < hi; ++i) plan.kept.push_back(i);
  }
  return plan;
}

Bvp eliminate_motion(const Bvp& signal, const PipelineConfig& cfg) {
  const MotionPlan plan = plan_motion_elimination(signal.samples, signal.fps, cfg);
  if (!plan.applied) return signal;
  std::vector<double> out;
  out.reserve(plan.kept.size());
  for (std::size_t i : plan.kept) out.push_back(signal.samples[i]);
  return Bvp::make(std::move(out), signal.fps);
}

std::vector<double> denoise(const std::vector<double>& signal, double threshold) {
  if (!(threshold > 0.0)) throw FormatError("denoise: threshold must be > 0");
  if (signal.empty()) throw FormatError("denoise: empty signal");

  // Single pass with a running offset; subtracting a step makes the retried
  // difference exactly zero, so no explicit retry is needed.
  std::vector<double> out;
  out.reserve(signal.size());
  out.push_back(signal[0]);
  double offset = 0.0;
  for (std::size_t i = 1; i < signal.size(); ++i) {
    const double diff = (signal[i] - offset) - out.back();
    if (std::abs(diff) > threshold) {
      offset += diff;
      out.push_back(out.back());
    } else {
      out.push_back(signal[i] - offset);
    }
  }
  return out;
}

std::vector<double> normalize(const std::vector<double>& signal) {
  if (signal.empty()) throw FormatError("normalize: empty signal");
  const double mu = mean_of(signal);
  const double sigma = population_std(signal);
  // constant up to accumulation round-off counts as flat
  if (!(sigma > 1e-12 * std::max(1.0, std::abs(mu))))
    throw AnalysisError("normalize: flat signal");
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = (signal[i] - mu) / sigma;
  return out;
}

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Cyclic Jacobi sweeps; enough for 3x3 symmetric matrices.
void jacobi_eigen3(Mat3 a, Mat3& vectors, std::array<double, 3>& values) {
  Mat3 v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  vectors = v;
  for (int i = 0; i < 3; ++i) values[i] = a[i][i];
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

// (M M^T)^(-1/2) M, which orthonormalizes the rows of M.
Mat3 symmetric_decorrelate(const Mat3& m) {
  Mat3 mmt{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i][k] * m[j][k];
      mmt[i][j] = s;
    }
  Mat3 vec;
  std::array<double, 3> val;
  jacobi_eigen3(mmt, vec, val);
  Mat3 inv_sqrt{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        s += vec[i][k] * vec[j][k] / std::sqrt(std::max(val[k], 1e-12));
      inv_sqrt[i][j] = s;
    }
  return matmul(inv_sqrt, m);
}

}  // namespace

IcaResult ica_extract(const std::array<std::vector<double>, 3>& channels,
                      const std::vector<double>& reference, std::uint64_t seed) {
  const std::size_t n = channels[0].size();
  if (channels[1].size() != n || channels[2].size() != n || reference.size() != n)
    throw FormatError("ica_extract: channel length mismatch");
  if (n < 32) throw AnalysisError("ica_extract: too few samples");

  // Covariance of the (nominally zero-mean) channels.
  std::array<double, 3> mu{};
  for (int c = 0; c < 3; ++c) mu[c] = mean_of(channels[c]);
  Mat3 cov{};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += (channels[i][k] - mu[i]) * (channels[j][k] - mu[j]);
      cov[i][j] = cov[j][i] = s / static_cast<double>(n);
    }

  Mat3 eigvec;
  std::array<double, 3> eigval;
  jacobi_eigen3(cov, eigvec, eigval);
  const double val_max = std::max({eigval[0], eigval[1], eigval[2]});
  const double val_min = std::min({eigval[0], eigval[1], eigval[2]});
  if (!(val_max > 0.0) || val_min < 1e-10 * val_max) {
    // Mixing matrix is rank deficient; nothing to separate.
    return IcaResult{reference, true};
  }

  // Whitened data Z = D^(-1/2) V^T (X - mu), stored row-major 3 x n.
  std::vector<double> z(3 * n);
  for (int i = 0; i < 3; ++i) {
    const double scale = 1.0 / std::sqrt(eigval[i]);
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += eigvec[c][i] * (channels[c][k] - mu[c]);
      z[static_cast<std::size_t>(i) * n + k] = s * scale;
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat3 w;
  for (auto& row : w)
    for (auto& x : row) x = gauss(rng);
  w = symmetric_decorrelate(w);

  bool converged = false;
  for (int iter = 0; iter < kIcaMaxIter; ++iter) {
    Mat3 w_next{};
    std::array<double, 3> gp_mean{};
    for (int i = 0; i < 3; ++i) {
      double sum_gp = 0.0;
      std::array<double, 3> acc{};
      for (std::size_t k = 0; k < n; ++k) {
        double y = 0.0;
        for (int c = 0; c < 3; ++c) y += w[i][c] * z[static_cast<std::size_t>(c) * n + k];
        const double g = std::tanh(y);
        sum_gp += 1.0 - g * g;
        for (int c = 0; c < 3; ++c) acc[c] += g * z[static_cast<std::size_t>(c) * n + k];
      }
      gp_mean[i] = sum_gp / static_cast<double>(n);
      for (int c = 0; c < 3; ++c)
        w_next[i][c] = acc[c] / static_cast<double>(n) - gp_mean[i] * w[i][c];
    }
    w_next = symmetric_decorrelate(w_next);

    double delta = 0.0;
    for (int i = 0; i < 3; ++i) {
      double dot = 0.0;
      for (int c = 0; c < 3; ++c) dot += w_next[i][c] * w[i][c];
      delta = std::max(delta, std::abs(1.0 - std::abs(dot)));
    }
    w = w_next;
    if (delta < kIcaTol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw AnalysisError("ica_extract: ica non-convergence");

  // Component best correlated with the reference, sign-aligned to it.
  int best = 0;
  double best_abs = -1.0;
  double best_corr = 0.0;
  std::array<std::vector<double>, 3> comps;
  for (int i = 0; i < 3; ++i) {
    comps[i].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += w[i][c] * z[static_cast<std::size_t>(c) * n + k];
      comps[i][k] = s;
    }
    const double corr = pearson(comps[i], reference);
    if (std::abs(corr) > best_abs) {
      best_abs = std::abs(corr);
      best_corr = corr;
      best = i;
    }
  }
  std::vector<double> out = std::move(comps[best]);
  if (best_corr < 0.0)
    for (double& x : out) x = -x;
  return IcaResult{std::move(out), false};
}

std::vector<double> detrend(const std::vector<double>& signal, double lambda) {
  const std::size_t n = signal.size();
  if (n < 3) throw AnalysisError("detrend: signal too short");
  if (!(lambda > 0.0)) throw FormatError("detrend: lambda must be > 0");

  // Bands of A = I + lambda^2 D2'D2, accumulated row by row of D2.
  const double l2 = lambda * lambda;
  std::vector<double> d0(n, 1.0), d1(n > 1 ? n - 1 : 0, 0.0), d2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    d0[k] += l2;
    d0[k + 1] += 4.0 * l2;
    d0[k + 2] += l2;
    d1[k] += -2.0 * l2;
    d1[k + 1] += -2.0 * l2;
    d2[k] += l2;
  }

  // LDL^T with bandwidth 2.
  std::vector<double> diag(n), l1(n, 0.0), l2b(n, 0.0);
  diag[0] = d0[0];
  l1[1] = d1[0] / diag[0];
  diag[1] = d0[1] - l1[1] * l1[1] * diag[0];
  for (std::size_t i = 2; i < n; ++i) {
    l2b[i] = d2[i - 2] / diag[i - 2];
    l1[i] = (d1[i - 1] - l2b[i] * l1[i - 1] * diag[i - 2]) / diag[i - 1];
    diag[i] = d0[i] - l1[i] * l1[i] * diag[i - 1] - l2b[i] * l2b[i] * diag[i - 2];
  }

  std::vector<double> y(n);
  y[0] = signal[0];
  y[1] = signal[1] - l1[1] * y[0];
  for (std::size_t i = 2; i < n; ++i) y[i] = signal[i] - l1[i] * y[i - 1] - l2b[i] * y[i - 2];
  for (std::size_t i = 0; i < n; ++i) y[i] /= diag[i];
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) y[i] -= l1[i + 1] * y[i + 1];
    if (i + 2 < n) y[i] -= l2b[i + 2] * y[i + 2];
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = signal[i] - y[i];
  return out;
}

std::vector<double> moving_average(const std::vector<double>& signal, int len) {
  if (len < 1) throw FormatError("moving_average: len must be >= 1");
  const std::size_t window = static_cast<std::size_t>(len);
  std::vector<double> out(signal.size());
  double running = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    running += signal[i];
    if (i >= window) running -= signal[i - window];
    const std::size_t count = std::min(i + 1, window);
    out[i] = running / static_cast<double>(count);
  }
  return out;
}

RoiProcessing process_roi_full(const RoiTrace& trace, const PipelineConfig& cfg) {
  cfg.validate();
  if (!(population_std(trace.g) > 1e-12 * std::max(1.0, std::abs(mean_of(trace.g)))))
    throw AnalysisError("process_roi: flat signal");

  RoiProcessing result;

  // Motion gate decided on the raw green channel, applied to all channels.
  const MotionPlan plan = plan_motion_elimination(trace.g, trace.fps, cfg);
  result.snr_db = plan.snr_db;
  result.motion_compacted = plan.applied;

  std::array<const std::vector<double>*, 3> raw{&trace.r, &trace.g, &trace.b};
  std::array<std::vector<double>, 3> kept_ch;
  if (plan.applied) {
    for (int c = 0; c < 3; ++c) {
      kept_ch[c].reserve(plan.kept.size());
      for (std::size_t i : plan.kept) kept_ch[c].push_back((*raw[c])[i]);
    }
    result.stages.kept = plan.kept;
  } else {
    for (int c = 0; c < 3; ++c) kept_ch[c] = *raw[c];
    result.stages.kept.resize(trace.size());
    std::iota(result.stages.kept.begin(), result.stages.kept.end(), 0);
  }

  for (int c = 0; c < 3; ++c) {
    result.stages.denoised[c] = denoise(kept_ch[c], cfg.denoise_threshold);
    result.stages.normalized[c] = normalize(result.stages.denoised[c]);
  }

  const std::vector<double>& green = result.stages.normalized[1];
  if (green.size() < 32) throw AnalysisError("process_roi: too few samples for ica");

  // Selection reference: the green channel with its slow drift removed.
  // Against the raw normalized green, a strong baseline trend outscores the
  // pulse and the correlation rule would latch onto the trend component,
  // which the detrending stage then erases.
  const std::vector<double> reference = detrend(green, cfg.detrend_lambda);
  try {
    IcaResult ica = ica_extract(result.stages.normalized, reference, cfg.ica_seed);
    result.ica_fallback = ica.fallback;
    result.stages.ica = ica.fallback ? green : std::move(ica.component);
  } catch (const AnalysisError&) {
    // Non-convergence: the green channel carries the strongest pulse.
    result.ica_fallback = true;
    result.stages.ica = green;
  }

  result.stages.detrended = detrend(result.stages.ica, cfg.detrend_lambda);
  result.stages.smoothed = moving_average(result.stages.detrended, cfg.moving_avg_len);
  result.bvp = Bvp::make(result.stages.smoothed, trace.fps);
  return result;
}

}  // namespace rppg
