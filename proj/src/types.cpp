#include "rppg/types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rppg/error.hpp"

namespace rppg {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool in_channel_range(const std::vector<double>& v) {
  for (double x : v)
    if (x < 0.0 || x > 255.0) return false;
  return true;
}

}  // namespace

const char* roi_name(RoiId roi) {
  switch (roi) {
    case RoiId::Forehead: return "forehead";
    case RoiId::CheekNose: return "cheeknose";
    case RoiId::FaceNoMouth: return "facenomouth";
  }
  return "?";
}

std::optional<RoiId> roi_from_name(const std::string& name) {
  if (name == "forehead") return RoiId::Forehead;
  if (name == "cheeknose") return RoiId::CheekNose;
  if (name == "facenomouth") return RoiId::FaceNoMouth;
  return std::nullopt;
}

const char* verdict_name(QualityVerdict v) {
  switch (v) {
    case QualityVerdict::Good: return "good";
    case QualityVerdict::Enhanced: return "enhanced";
    case QualityVerdict::TooDark: return "too_dark";
    case QualityVerdict::LowContrast: return "low_contrast";
    case QualityVerdict::VaryingLight: return "varying_light";
  }
  return "?";
}

std::optional<QualityVerdict> verdict_from_name(const std::string& name) {
  if (name == "good") return QualityVerdict::Good;
  if (name == "enhanced") return QualityVerdict::Enhanced;
  if (name == "too_dark") return QualityVerdict::TooDark;
  if (name == "low_contrast") return QualityVerdict::LowContrast;
  if (name == "varying_light") return QualityVerdict::VaryingLight;
  return std::nullopt;
}

RoiTrace RoiTrace::make(RoiId roi, double fps, std::vector<double> r, std::vector<double> g,
                        std::vector<double> b, std::vector<double> timestamps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw FormatError("RoiTrace: fps must be > 0");
  if (r.size() != g.size() || g.size() != b.size())
    throw FormatError("RoiTrace: channel lengths differ");
  if (g.size() < 2) throw FormatError("RoiTrace: trace too short (need at least 2 frames)");
  for (const auto* ch : {&r, &g, &b}) {
    if (!all_finite(*ch) || !in_channel_range(*ch))
      throw FormatError("RoiTrace: channel value out of range [0,255]");
  }
  if (!timestamps.empty()) {
    if (timestamps.size() != g.size()) throw FormatError("RoiTrace: timestamp count mismatch");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i] > timestamps[i - 1]))
        throw FormatError("RoiTrace: timestamps not strictly increasing");
  }
  RoiTrace t;
  t.roi = roi;
  t.fps = fps;
  t.r = std::move(r);
  t.g = std::move(g);
  t.b = std::move(b);
  t.timestamps = std::move(timestamps);
  return t;
}

Bvp Bvp::make(std::vector<double> samples, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw FormatError("Bvp: fps must be > 0");
  if (samples.size() < 2) throw FormatError("Bvp: signal too short");
  if (!all_finite(samples)) throw FormatError("Bvp: non-finite sample");
  return Bvp{std::move(samples), fps};
}

Psd Psd::make(std::vector<double> freqs, std::vector<double> power) {
  if (freqs.size() != power.size()) throw FormatError("Psd: freqs/power length mismatch");
  for (std::size_t i = 1; i < freqs.size(); ++i)
    if (!(freqs[i] > freqs[i - 1])) throw FormatError("Psd: freqs not strictly increasing");
  for (double p : power)
    if (!(p >= 0.0) || !std::isfinite(p)) throw FormatError("Psd: power must be finite and >= 0");
  return Psd{std::move(freqs), std::move(power)};
}

IbiSeries IbiSeries::make(std::vector<double> intervals) {
  for (double x : intervals)
    if (!(x > 0.0) || !std::isfinite(x)) throw FormatError("IbiSeries: interval must be > 0");
  return IbiSeries{std::move(intervals)};
}

void PipelineConfig::validate() const {
  if (!(denoise_threshold > 0.0)) throw FormatError("config: denoise_threshold must be > 0");
  if (!(detrend_lambda > 0.0)) throw FormatError("config: detrend_lambda must be > 0");
  if (moving_avg_len < 1) throw FormatError("config: moving_avg_len must be >= 1");
  if (!(hr_band[0] > 0.0 && hr_band[0] < hr_band[1]))
    throw FormatError("config: hr_band must satisfy 0 < lo < hi");
  if (!(snr_band_bpm[0] > 0.0 && snr_band_bpm[0] < snr_band_bpm[1]))
    throw FormatError("config: snr_band_bpm must satisfy 0 < lo < hi");
  if (!(snr_window_bpm > 0.0)) throw FormatError("config: snr_window_bpm must be > 0");
  if (motion_segments < 1) throw FormatError("config: motion_segments must be >= 1");
  if (!(motion_drop_fraction > 0.0 && motion_drop_fraction < 1.0))
    throw FormatError("config: motion_drop_fraction must be in (0,1)");
  if (welch_segment_len < 8) throw FormatError("config: welch_segment_len must be >= 8");
  if (!(welch_overlap > 0.0 && welch_overlap < 1.0))
    throw FormatError("config: welch_overlap must be in (0,1)");
  if (welch_fft_len < welch_segment_len)
    throw FormatError("config: welch_fft_len must be >= welch_segment_len");
  if (!(peak_min_distance_s >= 0.0)) throw FormatError("config: peak_min_distance_s must be >= 0");
  if (!(spo2_B >= 0.0)) throw FormatError("config: spo2_B must be >= 0");
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["denoise_threshold"] = c.denoise_threshold;
  j["detrend_lambda"] = c.detrend_lambda;
  j["moving_avg_len"] = c.moving_avg_len;
  j["hr_band"] = c.hr_band;
  j["snr_band_bpm"] = c.snr_band_bpm;
  j["snr_window_bpm"] = c.snr_window_bpm;
  j["motion_segments"] = c.motion_segments;
  j["motion_drop_fraction"] = c.motion_drop_fraction;
  j["welch_segment_len"] = c.welch_segment_len;
  j["welch_overlap"] = c.welch_overlap;
  j["welch_fft_len"] = c.welch_fft_len;
  j["peak_min_distance_s"] = c.peak_min_distance_s;
  j["spo2_A"] = c.spo2_A;
  j["spo2_B"] = c.spo2_B;
  j["ica_seed"] = c.ica_seed;
  return j;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw FormatError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config: top level must be an object");

  PipelineConfig c;  // defaults; file keys override
  try {
    for (auto& [key, val] : j.items()) {
      if (key == "denoise_threshold") c.denoise_threshold = val.get<double>();
      else if (key == "detrend_lambda") c.detrend_lambda = val.get<double>();
      else if (key == "moving_avg_len") c.moving_avg_len = val.get<int>();
      else if (key == "hr_band") c.hr_band = val.get<std::array<double, 2>>();
      else if (key == "snr_band_bpm") c.snr_band_bpm = val.get<std::array<double, 2>>();
      else if (key == "snr_window_bpm") c.snr_window_bpm = val.get<double>();
      else if (key == "motion_segments") c.motion_segments = val.get<int>();
      else if (key == "motion_drop_fraction") c.motion_drop_fraction = val.get<double>();
      else if (key == "welch_segment_len") c.welch_segment_len = val.get<int>();
      else if (key == "welch_overlap") c.welch_overlap = val.get<double>();
      else if (key == "welch_fft_len") c.welch_fft_len = val.get<int>();
      else if (key == "peak_min_distance_s") c.peak_min_distance_s = val.get<double>();
      else if (key == "spo2_A") c.spo2_A = val.get<double>();
      else if (key == "spo2_B") c.spo2_B = val.get<double>();
      else if (key == "ica_seed") c.ica_seed = val.get<std::uint64_t>();
      else throw FormatError("config: unknown key '" + key + "'");
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("config: bad value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string PipelineConfig::to_json_text() const {
  return config_to_json(*this).dump(2) + "\n";
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("config: cannot write '" + path + "'");
  out << to_json_text();
}

std::string PipelineConfig::hash() const {
  // FNV-1a over the canonical JSON text.
  const std::string text = config_to_json(*this).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rppg
