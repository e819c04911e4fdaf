#include "rppg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rppg/error.hpp"
#include "rppg/image.hpp"
#include "rppg/ingest.hpp"
#include "rppg/luminance.hpp"
#include "rppg/report.hpp"
#include "rppg/vitals.hpp"

namespace fs = std::filesystem;

namespace rppg {

GroundTruth GroundTruth::make(std::string recording_id, std::string condition,
                              std::optional<double> hr_bpm, std::optional<double> rmssd_ms,
                              std::optional<double> spo2_pct) {
  if (recording_id.empty()) throw FormatError("ground truth: empty recording_id");
  if (!hr_bpm && !rmssd_ms && !spo2_pct)
    throw FormatError("ground truth: no vitals for '" + recording_id + "'");
  for (const auto& v : {hr_bpm, rmssd_ms, spo2_pct})
    if (v && !(*v > 0.0))
      throw FormatError("ground truth: non-positive vital for '" + recording_id + "'");
  return GroundTruth{std::move(recording_id), std::move(condition), hr_bpm, rmssd_ms, spo2_pct};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::optional<double> parse_opt(const std::string& s, std::size_t lineno) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("ground truth: malformed number '" + s + "' on line " +
                      std::to_string(lineno));
  }
}

}  // namespace

std::vector<GroundTruth> load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("load_ground_truth: cannot open '" + path + "'");

  std::vector<GroundTruth> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct")
        throw FormatError("load_ground_truth: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5)
      throw FormatError("load_ground_truth: line " + std::to_string(lineno) +
                        " has " + std::to_string(fields.size()) + " fields, expected 5");
    GroundTruth gt = GroundTruth::make(fields[0], fields[1], parse_opt(fields[2], lineno),
                                       parse_opt(fields[3], lineno), parse_opt(fields[4], lineno));
    if (!ids.insert(gt.recording_id).second)
      throw FormatError("load_ground_truth: duplicate recording_id '" + gt.recording_id + "'");
    records.push_back(std::move(gt));
  }
  if (!have_header) throw FormatError("load_ground_truth: missing header");
  return records;
}

double mae(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw FormatError("mae: no pairs");
  double acc = 0.0;
  for (const auto& [p, t] : pairs) acc += std::abs(p - t);
  return acc / static_cast<double>(pairs.size());
}

const char* vital_label(Vital v) {
  switch (v) {
    case Vital::Hr: return "HR (bpm)";
    case Vital::Rmssd: return "HRV (ms)";
    case Vital::Spo2: return "SpO2 (%)";
  }
  return "?";
}

const char* vital_key(Vital v) {
  switch (v) {
    case Vital::Hr: return "hr_bpm";
    case Vital::Rmssd: return "rmssd_ms";
    case Vital::Spo2: return "spo2_pct";
  }
  return "?";
}

namespace {

constexpr std::array<Vital, 3> kVitals{Vital::Hr, Vital::Rmssd, Vital::Spo2};

struct LoadedRecording {
  std::map<RoiId, RoiTrace> traces;
  QualityVerdict quality{QualityVerdict::Good};
};

LoadedRecording load_recording(const std::string& dataset_dir, const std::string& id) {
  const fs::path trace_path = fs::path(dataset_dir) / (id + ".csv");
  if (fs::is_regular_file(trace_path)) {
    TraceFile file = load_trace(trace_path.string());
    return LoadedRecording{std::move(file.traces), file.quality};
  }

  const fs::path rec_dir = fs::path(dataset_dir) / id;
  if (!fs::is_directory(rec_dir))
    throw FormatError("evaluate: recording '" + id + "' not found under '" + dataset_dir + "'");

  const fs::path meta_path = rec_dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw FormatError("evaluate: missing '" + meta_path.string() + "'");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const std::exception& e) {
    throw FormatError("evaluate: invalid meta.json for '" + id + "': " + e.what());
  }
  if (!meta.contains("fps")) throw FormatError("evaluate: meta.json for '" + id + "' lacks fps");
  const double fps = meta.at("fps").get<double>();

  std::array<RoiDefinition, 3> defs = default_roi_definitions();
  if (meta.contains("roi_defs"))
    defs = load_roi_definitions((rec_dir / meta.at("roi_defs").get<std::string>()).string());

  const auto frame_files = list_frame_files(rec_dir.string());
  if (frame_files.size() < 2)
    throw FormatError("evaluate: recording '" + id + "' has too few frame files");
  std::vector<Image> frames;
  frames.reserve(frame_files.size());
  for (const auto& f : frame_files) frames.push_back(load_image(f));

  const QualityVerdict verdict = assess_recording(frames);
  std::map<RoiId, RoiTrace> traces;
  if (!verdict_rejects(verdict)) {
    const auto landmarks = load_landmarks((rec_dir / "landmarks.json").string());
    traces = extract_traces(frames, landmarks, defs, fps);
  }
  return LoadedRecording{std::move(traces), verdict};
}

}  // namespace

MaeTable evaluate(const std::string& dataset_dir, const std::string& gt_path,
                  const PipelineConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<GroundTruth> gts = load_ground_truth(gt_path);
  if (gts.empty()) throw FormatError("evaluate: ground truth is empty");
  std::sort(gts.begin(), gts.end(),
            [](const GroundTruth& a, const GroundTruth& b) { return a.recording_id < b.recording_id; });

  std::vector<RecordingOutcome> outcomes(gts.size());
  (void)jobs;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
#endif
  for (long long ii = 0; ii < static_cast<long long>(gts.size()); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const GroundTruth& gt = gts[i];
    RecordingOutcome& out = outcomes[i];
    out.recording_id = gt.recording_id;
    out.condition = gt.condition;
    try {
      LoadedRecording rec = load_recording(dataset_dir, gt.recording_id);
      const VitalsReport report = analyze(rec.traces, cfg, rec.quality);
      if (gt.hr_bpm) out.pairs[Vital::Hr] = {report.hr_bpm, *gt.hr_bpm};
      if (gt.rmssd_ms && report.rmssd_ms) out.pairs[Vital::Rmssd] = {*report.rmssd_ms, *gt.rmssd_ms};
      if (gt.spo2_pct && report.spo2_pct) out.pairs[Vital::Spo2] = {*report.spo2_pct, *gt.spo2_pct};
    } catch (const QualityError& e) {
      out.skip_reason = e.what();
    } catch (const AnalysisError& e) {
      out.skip_reason = e.what();
    }
    // FormatError (or anything unexpected) from a worker is fatal; capture
    // and rethrow below.
    catch (const std::exception& e) {
      out.skip_reason = std::string("\x01") + e.what();
    }
  }
  for (const auto& out : outcomes)
    if (!out.skip_reason.empty() && out.skip_reason[0] == '\x01')
      throw FormatError(out.skip_reason.substr(1));

  MaeTable table;
  table.recordings = outcomes;
  std::set<std::string> conditions;
  std::map<std::pair<std::string, Vital>, std::vector<std::pair<double, double>>> grouped;
  std::map<Vital, std::vector<std::pair<double, double>>> pooled;
  std::size_t analyzed = 0;
  for (const auto& out : outcomes) {
    if (!out.skip_reason.empty()) {
      ++table.skipped;
      continue;
    }
    ++analyzed;
    conditions.insert(out.condition);
    for (const auto& [vital, pair] : out.pairs) {
      grouped[{out.condition, vital}].push_back(pair);
      pooled[vital].push_back(pair);
    }
  }
  if (analyzed == 0) {
    std::string msg = "evaluate: zero successfully analyzed recordings";
    for (const auto& out : outcomes)
      if (!out.skip_reason.empty()) msg += "\n  " + out.recording_id + ": " + out.skip_reason;
    throw AnalysisError(msg);
  }

  table.conditions.assign(conditions.begin(), conditions.end());
  for (const auto& [key, pairs] : grouped)
    table.cells[key] = MaeCell{mae(pairs), pairs.size()};
  for (const auto& [vital, pairs] : pooled)
    table.overall_pooled[vital] = MaeCell{mae(pairs), pairs.size()};
  for (Vital vital : kVitals) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& cond : table.conditions) {
      const auto it = table.cells.find({cond, vital});
      if (it == table.cells.end()) continue;
      acc += it->second.mae;
      ++count;
    }
    if (count > 0) table.overall_by_condition[vital] = MaeCell{acc / static_cast<double>(count), count};
  }
  return table;
}

namespace {

nlohmann::ordered_json cell_json(const MaeCell& cell) {
  nlohmann::ordered_json j;
  j["mae"] = round_sig(cell.mae);
  j["n"] = cell.n;
  return j;
}

}  // namespace

std::string mae_table_to_json(const MaeTable& table) {
  nlohmann::ordered_json j;
  j["conditions"] = table.conditions;
  nlohmann::ordered_json rows;
  for (Vital vital : kVitals) {
    if (table.overall_pooled.find(vital) == table.overall_pooled.end()) continue;
    nlohmann::ordered_json row;
    for (const auto& cond : table.conditions) {
      const auto it = table.cells.find({cond, vital});
      if (it != table.cells.end()) row[cond] = cell_json(it->second);
    }
    row["overall_pooled"] = cell_json(table.overall_pooled.at(vital));
    row["overall_mean_of_conditions"] = cell_json(table.overall_by_condition.at(vital));
    rows[vital_key(vital)] = std::move(row);
  }
  j["rows"] = std::move(rows);

  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& out : table.recordings) {
    nlohmann::ordered_json r;
    r["recording_id"] = out.recording_id;
    r["condition"] = out.condition;
    if (!out.skip_reason.empty()) {
      r["skip_reason"] = out.skip_reason;
    } else {
      for (Vital vital : kVitals) {
        const auto it = out.pairs.find(vital);
        if (it == out.pairs.end()) continue;
        nlohmann::ordered_json p;
        p["predicted"] = round_sig(it->second.first);
        p["truth"] = round_sig(it->second.second);
        p["abs_error"] = round_sig(std::abs(it->second.first - it->second.second));
        r[vital_key(vital)] = std::move(p);
      }
    }
    recs.push_back(std::move(r));
  }
  j["recordings"] = std::move(recs);
  j["skipped"] = table.skipped;
  return j.dump(2) + "\n";
}

std::string mae_table_to_text(const MaeTable& table) {
  constexpr int kNameWidth = 10;
  constexpr int kColWidth = 12;
  std::ostringstream out;
  char buf[64];

  std::snprintf(buf, sizeof(buf), "%-*s", kNameWidth, "");
  out << buf;
  for (const auto& cond : table.conditions) {
    std::snprintf(buf, sizeof(buf), "%*s", kColWidth, cond.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%*s%*s", kColWidth, "Overall", kColWidth, "CondMean");
  out << buf << "\n";

  for (Vital vital : kVitals) {
    const auto pooled = table.overall_pooled.find(vital);
    if (pooled == table.overall_pooled.end()) continue;
    std::snprintf(buf, sizeof(buf), "%-*s", kNameWidth, vital_label(vital));
    out << buf;
    for (const auto& cond : table.conditions) {
      const auto it = table.cells.find({cond, vital});
      if (it == table.cells.end())
        std::snprintf(buf, sizeof(buf), "%*s", kColWidth, "-");
      else
        std::snprintf(buf, sizeof(buf), "%*.6g", kColWidth, round_sig(it->second.mae));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%*.6g", kColWidth, round_sig(pooled->second.mae));
    out << buf;
    std::snprintf(buf, sizeof(buf), "%*.6g", kColWidth,
                  round_sig(table.overall_by_condition.at(vital).mae));
    out << buf << "\n";
  }
  out << "# Overall pools absolute errors across conditions; CondMean averages per-condition MAEs.\n";
  if (table.skipped > 0) {
    out << "# Skipped " << table.skipped << " recording(s):\n";
    for (const auto& rec : table.recordings)
      if (!rec.skip_reason.empty())
        out << "#   " << rec.recording_id << ": " << rec.skip_reason << "\n";
  }
  return out.str();
}

}  // namespace rppg
