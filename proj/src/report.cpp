#include "rppg/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "rppg/error.hpp"

namespace rppg {

double round_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

std::string report_to_json(const VitalsReport& report, const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["hr_bpm"] = round_sig(report.hr_bpm);
  if (report.rmssd_ms)
    j["rmssd_ms"] = round_sig(*report.rmssd_ms);
  else
    j["rmssd_ms"] = nullptr;
  if (report.spo2_pct)
    j["spo2_pct"] = round_sig(*report.spo2_pct);
  else
    j["spo2_pct"] = nullptr;
  j["selected_roi"] = roi_name(report.selected_roi);
  j["peak_power"] = round_sig(report.peak_power);
  nlohmann::ordered_json per_roi;
  for (const auto& [roi, power] : report.per_roi_peak_power) per_roi[roi_name(roi)] = round_sig(power);
  j["per_roi_peak_power"] = std::move(per_roi);
  j["quality"] = verdict_name(report.quality);
  j["snr_db"] = round_sig(report.snr_db);
  j["flags"] = report.flags;
  j["config_hash"] = cfg.hash();
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_text_file: cannot write '" + path + "'");
  out << content;
  if (!out) throw FormatError("write_text_file: write failed for '" + path + "'");
}

}  // namespace rppg
