#include "rppg/vitals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "rppg/error.hpp"
#include "rppg/spectral.hpp"

namespace rppg {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

Psd welch_psd(const std::vector<double>& samples, double fps, const PipelineConfig& cfg) {
  const std::size_t n = samples.size();
  if (n < 16) throw AnalysisError("welch_psd: signal too short");
  if (!(fps > 0.0)) throw FormatError("welch_psd: fps must be > 0");

  const std::size_t nperseg = std::min<std::size_t>(static_cast<std::size_t>(cfg.welch_segment_len), n);
  const std::size_t noverlap = static_cast<std::size_t>(
      std::floor(static_cast<double>(nperseg) * cfg.welch_overlap));
  const std::size_t hop = nperseg > noverlap ? nperseg - noverlap : 1;
  const std::size_t nfft =
      next_power_of_two(std::max<std::size_t>(static_cast<std::size_t>(cfg.welch_fft_len), nperseg));
  const std::size_t nbins = nfft / 2 + 1;

  // periodic Hann window
  std::vector<double> window(nperseg);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < nperseg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(nperseg));
    win_sq += window[i] * window[i];
  }

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + nperseg <= n; s += hop) starts.push_back(s);

  // One periodogram per segment, averaged in segment order afterwards so the
  // result does not depend on the thread count.
  std::vector<std::vector<double>> pgrams(starts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long si = 0; si < static_cast<long long>(starts.size()); ++si) {
    const std::size_t start = starts[static_cast<std::size_t>(si)];
    double seg_mean = 0.0;
    for (std::size_t i = 0; i < nperseg; ++i) seg_mean += samples[start + i];
    seg_mean /= static_cast<double>(nperseg);

    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    for (std::size_t i = 0; i < nperseg; ++i)
      buf[i] = {(samples[start + i] - seg_mean) * window[i], 0.0};
    fft_inplace(buf);

    auto& p = pgrams[static_cast<std::size_t>(si)];
    p.resize(nbins);
    const double scale = 1.0 / (fps * win_sq);
    for (std::size_t k = 0; k < nbins; ++k) {
      double v = std::norm(buf[k]) * scale;
      if (k != 0 && k != nfft / 2) v *= 2.0;  // one-sided
      p[k] = v;
    }
  }

  std::vector<double> power(nbins, 0.0);
  for (const auto& p : pgrams)
    for (std::size_t k = 0; k < nbins; ++k) power[k] += p[k];
  for (double& v : power) v /= static_cast<double>(pgrams.size());

  std::vector<double> freqs(nbins);
  for (std::size_t k = 0; k < nbins; ++k) freqs[k] = bin_freq(k, nfft, fps);
  return Psd::make(std::move(freqs), std::move(power));
}

Psd welch_psd(const Bvp& signal, const PipelineConfig& cfg) {
  return welch_psd(signal.samples, signal.fps, cfg);
}

RoiSelection select_roi(const std::map<RoiId, Psd>& psds, const std::array<double, 2>& band_hz) {
  if (psds.empty()) throw AnalysisError("select_roi: no usable region");

  RoiSelection best;
  bool found = false;
  for (const auto& [roi, psd] : psds) {  // map order = enum order, the tie rule
    double peak_power = -1.0;
    double peak_freq = 0.0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
      const double f = psd.freqs[k];
      if (f < band_hz[0] || f > band_hz[1]) continue;
      if (psd.power[k] > peak_power) {
        peak_power = psd.power[k];
        peak_freq = f;
      }
    }
    if (peak_power < 0.0)
      throw AnalysisError("select_roi: band empty within psd support");
    if (!found || peak_power > best.peak_power) {
      best = RoiSelection{roi, peak_freq, peak_power};
      found = true;
    }
  }
  return best;
}

double hr_from_peak(double peak_freq_hz, const std::array<double, 2>& band_hz) {
  if (peak_freq_hz < band_hz[0] || peak_freq_hz > band_hz[1])
    throw AnalysisError("hr_from_peak: peak frequency outside the configured band");
  return 60.0 * peak_freq_hz;
}

std::vector<double> detect_peaks(const Bvp& signal, double min_distance_s) {
  const auto& g = signal.samples;
  if (g.size() < 3) throw AnalysisError("detect_peaks: signal too short");

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    if (g[i] > g[i - 1] && g[i] >= g[i + 1] && g[i] > 0.0) candidates.push_back(i);
  }

  // Highest peaks claim their neighborhood first; equal heights go to the
  // earlier sample.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g[candidates[a]] > g[candidates[b]];
  });

  std::vector<std::size_t> kept;
  for (std::size_t oi : order) {
    const std::size_t idx = candidates[oi];
    const double t = static_cast<double>(idx) / signal.fps;
    bool blocked = false;
    for (std::size_t k : kept) {
      if (std::abs(t - static_cast<double>(k) / signal.fps) < min_distance_s) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<double> times;
  times.reserve(kept.size());
  for (std::size_t idx : kept) times.push_back(static_cast<double>(idx) / signal.fps);
  return times;
}

IbiSeries ibis_from_peaks(const std::vector<double>& peak_times) {
  if (peak_times.size() < 2) throw AnalysisError("ibis_from_peaks: insufficient peaks for HRV");
  std::vector<double> intervals(peak_times.size() - 1);
  for (std::size_t i = 1; i < peak_times.size(); ++i)
    intervals[i - 1] = peak_times[i] - peak_times[i - 1];
  return IbiSeries::make(std::move(intervals));
}

OutlierResult reject_outliers(const IbiSeries& ibis) {
  if (ibis.size() < 2) throw AnalysisError("reject_outliers: need at least 2 intervals");
  const double mu = mean_of(ibis.intervals);
  const double sigma = population_std(ibis.intervals);
  std::vector<double> kept;
  for (double x : ibis.intervals)
    if (!(std::abs(x - mu) > sigma)) kept.push_back(x);
  if (kept.size() < 2) return OutlierResult{ibis, true};
  return OutlierResult{IbiSeries::make(std::move(kept)), false};
}

double rmssd_ms(const IbiSeries& ibis) {
  const auto& v = ibis.intervals;
  if (v.size() < 2) throw AnalysisError("rmssd: need at least 2 intervals");
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += (v[i - 1] - v[i]) * (v[i - 1] - v[i]);
  return std::sqrt(acc / static_cast<double>(v.size() - 1)) * 1000.0;
}

double spo2_from_ror(double ratio_of_ratios, const PipelineConfig& cfg) {
  const double pct = (cfg.spo2_A - cfg.spo2_B * ratio_of_ratios) * 100.0;
  return std::clamp(pct, 0.0, 100.0);
}

double spo2(const std::vector<double>& red, const std::vector<double>& blue, double fps,
            const PipelineConfig& cfg) {
  if (red.size() != blue.size()) throw FormatError("spo2: channel length mismatch");
  if (static_cast<double>(red.size()) < 4.0 * fps)
    throw AnalysisError("spo2: need at least 4 s of signal");

  const double dc_r = mean_of(red);
  const double dc_ir = mean_of(blue);
  if (dc_r == 0.0 || dc_ir == 0.0) throw AnalysisError("spo2: zero DC level");

  // Pulsatile band isolated by detrending + smoothing; amplitude as std.
  auto ac_of = [&](const std::vector<double>& ch) {
    return population_std(moving_average(detrend(ch, cfg.detrend_lambda), cfg.moving_avg_len));
  };
  const double ac_r = ac_of(red);
  const double ac_ir = ac_of(blue);
  // guard well above solver round-off on a flat channel
  if (!(ac_ir > 1e-9 * std::max(1.0, std::abs(dc_ir))))
    throw AnalysisError("spo2: unmeasurable (no pulsatile blue component)");

  const double ror = (ac_r / dc_r) / (ac_ir / dc_ir);
  return spo2_from_ror(ror, cfg);
}

AnalysisResult analyze_full(const std::map<RoiId, RoiTrace>& traces, const PipelineConfig& cfg,
                            QualityVerdict quality) {
  cfg.validate();
  if (traces.empty()) throw AnalysisError("analyze: no traces");
  if (verdict_rejects(quality))
    throw QualityError(std::string("analyze: recording rejected by quality gate (") +
                       verdict_name(quality) + ")");

  AnalysisResult result;
  result.report.quality = quality;

  for (const auto& [roi, trace] : traces) {
    try {
      RoiProcessing processed = process_roi_full(trace, cfg);
      result.psds.emplace(roi, welch_psd(processed.bvp, cfg));
      result.rois.emplace(roi, std::move(processed));
    } catch (const AnalysisError& e) {
      result.unusable.emplace(roi, e.what());
    }
  }
  if (result.rois.empty()) throw AnalysisError("analyze: no usable region");

  const RoiSelection sel = select_roi(result.psds, cfg.hr_band);
  const RoiProcessing& chosen = result.rois.at(sel.roi);

  VitalsReport& report = result.report;
  report.selected_roi = sel.roi;
  report.peak_power = sel.peak_power;
  report.hr_bpm = hr_from_peak(sel.peak_freq_hz, cfg.hr_band);
  report.snr_db = chosen.snr_db;
  for (const auto& [roi, psd] : result.psds) {
    double peak = 0.0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
      if (psd.freqs[k] < cfg.hr_band[0] || psd.freqs[k] > cfg.hr_band[1]) continue;
      peak = std::max(peak, psd.power[k]);
    }
    report.per_roi_peak_power[roi] = peak;
  }

  if (chosen.motion_compacted) report.flags.push_back("motion_compacted");
  if (chosen.ica_fallback) report.flags.push_back("ica_fallback");
  for (const auto& [roi, reason] : result.unusable)
    report.flags.push_back(std::string("unusable_") + roi_name(roi));

  result.peak_times = detect_peaks(chosen.bvp, cfg.peak_min_distance_s);
  try {
    const IbiSeries raw_ibis = ibis_from_peaks(result.peak_times);
    const OutlierResult cleaned = reject_outliers(raw_ibis);
    if (cleaned.kept_all_as_fallback) report.flags.push_back("ibi_outlier_fallback");
    report.rmssd_ms = rmssd_ms(cleaned.ibis);
  } catch (const AnalysisError&) {
    report.flags.push_back("hrv_unavailable");
  }

  try {
    report.spo2_pct = spo2(chosen.stages.denoised[0], chosen.stages.denoised[2],
                           traces.at(sel.roi).fps, cfg);
  } catch (const AnalysisError&) {
    report.flags.push_back("spo2_unavailable");
  }

  return result;
}

VitalsReport analyze(const std::map<RoiId, RoiTrace>& traces, const PipelineConfig& cfg,
                     QualityVerdict quality) {
  return analyze_full(traces, cfg, quality).report;
}

}  // namespace rppg
