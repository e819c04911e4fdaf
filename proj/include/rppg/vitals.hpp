#pragma once

#include <map>
#include <vector>

#include "rppg/pipeline.hpp"
#include "rppg/types.hpp"

namespace rppg {

// Welch estimate: Hann-windowed, mean-removed segments, zero-padded
// periodograms averaged. Parallel over segments.
Psd welch_psd(const Bvp& signal, const PipelineConfig& cfg = {});
Psd welch_psd(const std::vector<double>& samples, double fps, const PipelineConfig& cfg = {});

struct RoiSelection {
  RoiId roi{RoiId::Forehead};
  double peak_freq_hz{0.0};
  double peak_power{0.0};
};

// Region whose PSD carries the highest in-band peak power; ties go to the
// earlier region in enum order.
RoiSelection select_roi(const std::map<RoiId, Psd>& psds, const std::array<double, 2>& band_hz);

double hr_from_peak(double peak_freq_hz, const std::array<double, 2>& band_hz = {0.5, 4.0});

// Strictly positive local maxima, thinned to a minimum separation (the higher
// peak wins). Returns peak times in seconds.
std::vector<double> detect_peaks(const Bvp& signal, double min_distance_s = 0.25);

IbiSeries ibis_from_peaks(const std::vector<double>& peak_times);

struct OutlierResult {
  IbiSeries ibis;
  bool kept_all_as_fallback{false};  // fewer than 2 survivors; original returned
};

// Drops intervals farther than one population standard deviation from the mean.
OutlierResult reject_outliers(const IbiSeries& ibis);

double rmssd_ms(const IbiSeries& ibis);

// Ratio-of-ratios with the blue channel standing in for infrared.
double spo2_from_ror(double ratio_of_ratios, const PipelineConfig& cfg = {});
double spo2(const std::vector<double>& red, const std::vector<double>& blue, double fps,
            const PipelineConfig& cfg = {});

struct AnalysisResult {
  VitalsReport report;
  std::map<RoiId, RoiProcessing> rois;        // usable regions only
  std::map<RoiId, Psd> psds;
  std::map<RoiId, std::string> unusable;      // region -> reason
  std::vector<double> peak_times;             // of the selected region's signal
};

// The whole back half: per-region processing, spectral estimation, region
// selection, then HR, HRV and oxygen saturation.
AnalysisResult analyze_full(const std::map<RoiId, RoiTrace>& traces, const PipelineConfig& cfg,
                            QualityVerdict quality = QualityVerdict::Good);

VitalsReport analyze(const std::map<RoiId, RoiTrace>& traces, const PipelineConfig& cfg,
                     QualityVerdict quality = QualityVerdict::Good);

}  // namespace rppg
