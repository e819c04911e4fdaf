#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rppg {

// The three face regions the pipeline compares.
enum class RoiId { Forehead = 0, CheekNose = 1, FaceNoMouth = 2 };

inline constexpr std::array<RoiId, 3> kAllRois{RoiId::Forehead, RoiId::CheekNose,
                                               RoiId::FaceNoMouth};

const char* roi_name(RoiId roi);                 // "forehead" | "cheeknose" | "facenomouth"
std::optional<RoiId> roi_from_name(const std::string& name);

// Per-frame mean R/G/B of one face region at a fixed frame rate.
struct RoiTrace {
  RoiId roi{RoiId::Forehead};
  double fps{0.0};
  std::vector<double> r, g, b;
  std::vector<double> timestamps;  // optional; strictly increasing when present

  std::size_t size() const { return g.size(); }

  // Validates channel lengths, value ranges and timestamps; throws FormatError.
  static RoiTrace make(RoiId roi, double fps, std::vector<double> r, std::vector<double> g,
                       std::vector<double> b, std::vector<double> timestamps = {});
};

// A processed one-dimensional blood-volume-pulse signal.
struct Bvp {
  std::vector<double> samples;
  double fps{0.0};

  std::size_t size() const { return samples.size(); }

  static Bvp make(std::vector<double> samples, double fps);
};

// Frequency/power pairs from spectral estimation.
struct Psd {
  std::vector<double> freqs;  // Hz, strictly increasing
  std::vector<double> power;  // >= 0, same length as freqs

  static Psd make(std::vector<double> freqs, std::vector<double> power);
};

// Inter-beat intervals in seconds.
struct IbiSeries {
  std::vector<double> intervals;  // each > 0 and finite

  std::size_t size() const { return intervals.size(); }

  static IbiSeries make(std::vector<double> intervals);
};

enum class QualityVerdict { Good, Enhanced, TooDark, LowContrast, VaryingLight };

const char* verdict_name(QualityVerdict v);
std::optional<QualityVerdict> verdict_from_name(const std::string& name);

// True when the verdict aborts analysis.
inline bool verdict_rejects(QualityVerdict v) {
  return v == QualityVerdict::TooDark || v == QualityVerdict::LowContrast ||
         v == QualityVerdict::VaryingLight;
}

// All knobs of the processing chain, so a run is reproducible from one record.
struct PipelineConfig {
  double denoise_threshold{1.0};        // step threshold, raw pixel-mean units
  double detrend_lambda{10.0};          // smoothness-priors smoothing parameter
  int moving_avg_len{5};                // moving average window
  std::array<double, 2> hr_band{0.5, 4.0};        // Hz; HR search band
  std::array<double, 2> snr_band_bpm{30.0, 240.0};  // bpm; retained spectrum band
  double snr_window_bpm{3.0};           // binary window width past the peak
  int motion_segments{10};
  double motion_drop_fraction{0.05};
  int welch_segment_len{256};
  double welch_overlap{0.5};
  int welch_fft_len{4096};
  double peak_min_distance_s{0.25};
  double spo2_A{1.0};
  double spo2_B{0.04};
  std::uint64_t ica_seed{0};

  bool operator==(const PipelineConfig&) const = default;

  void validate() const;  // throws FormatError on a violated invariant

  // Flat JSON document mirroring the field names exactly.
  static PipelineConfig load(const std::string& path);
  static PipelineConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  void save(const std::string& path) const;

  // Content hash of the resolved configuration (hex string).
  std::string hash() const;
};

// The artifact's output record.
struct VitalsReport {
  double hr_bpm{0.0};
  std::optional<double> rmssd_ms;
  std::optional<double> spo2_pct;
  RoiId selected_roi{RoiId::Forehead};
  double peak_power{0.0};
  std::map<RoiId, double> per_roi_peak_power;
  QualityVerdict quality{QualityVerdict::Good};
  double snr_db{0.0};
  std::vector<std::string> flags;  // e.g. "motion_compacted", "ica_fallback"
};

}  // namespace rppg
