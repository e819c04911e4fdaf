#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

// One reference measurement, e.g. from a finger-clip oximeter.
struct GroundTruth {
  std::string recording_id;
  std::string condition;  // free-form label ("steady", "talking", ...)
  std::optional<double> hr_bpm;
  std::optional<double> rmssd_ms;
  std::optional<double> spo2_pct;

  static GroundTruth make(std::string recording_id, std::string condition,
                          std::optional<double> hr_bpm, std::optional<double> rmssd_ms,
                          std::optional<double> spo2_pct);
};

// CSV `recording_id,condition,hr_bpm,rmssd_ms,spo2_pct`; empty fields mean the
// vital is absent.
std::vector<GroundTruth> load_ground_truth(const std::string& path);

double mae(const std::vector<std::pair<double, double>>& pairs);

enum class Vital { Hr, Rmssd, Spo2 };
const char* vital_label(Vital v);  // "HR (bpm)" | "HRV (ms)" | "SpO2 (%)"
const char* vital_key(Vital v);    // "hr_bpm" | "rmssd_ms" | "spo2_pct"

struct MaeCell {
  double mae{0.0};
  std::size_t n{0};
};

struct RecordingOutcome {
  std::string recording_id;
  std::string condition;
  std::map<Vital, std::pair<double, double>> pairs;  // vital -> (predicted, truth)
  std::string skip_reason;                           // nonempty when excluded
};

struct MaeTable {
  std::vector<std::string> conditions;                     // sorted
  std::map<std::pair<std::string, Vital>, MaeCell> cells;  // per (condition, vital)
  std::map<Vital, MaeCell> overall_pooled;        // absolute errors pooled across conditions
  std::map<Vital, MaeCell> overall_by_condition;  // mean of per-condition MAEs
  std::vector<RecordingOutcome> recordings;       // sorted by recording_id
  std::size_t skipped{0};
};

// Runs the analysis over every ground-truth recording found under
// dataset_dir. Recordings are `<id>.csv` trace files or `<id>/` directories
// holding frame files, landmarks.json and meta.json. jobs > 1 fans the
// recordings out across threads.
MaeTable evaluate(const std::string& dataset_dir, const std::string& gt_path,
                  const PipelineConfig& cfg, int jobs = 1);

std::string mae_table_to_json(const MaeTable& table);
std::string mae_table_to_text(const MaeTable& table);

}  // namespace rppg
