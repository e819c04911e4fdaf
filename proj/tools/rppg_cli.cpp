#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rppg/error.hpp"
#include "rppg/eval.hpp"
#include "rppg/image.hpp"
#include "rppg/ingest.hpp"
#include "rppg/luminance.hpp"
#include "rppg/plot.hpp"
#include "rppg/report.hpp"
#include "rppg/vitals.hpp"

namespace fs = std::filesystem;
using namespace rppg;

namespace {

enum ExitCode : int {
  kOk = 0,
  kQualityRejected = 2,
  kInputError = 3,
  kAnalysisFailed = 4,
};

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    if (seed) cfg.ica_seed = *seed;
    cfg.validate();
    return cfg;
  }
};

std::string quality_block(QualityVerdict verdict, const std::string& message) {
  std::ostringstream out;
  out << "{\n  \"quality\": \"" << verdict_name(verdict) << "\",\n  \"error\": \"" << message
      << "\"\n}\n";
  return out.str();
}

void dump_stages(const AnalysisResult& analysis, const std::string& dir) {
  fs::create_directories(dir);
  char buf[256];
  for (const auto& [roi, processed] : analysis.rois) {
    std::ostringstream csv;
    csv << "kept_index,denoised_r,denoised_g,denoised_b,"
           "normalized_r,normalized_g,normalized_b,ica,detrended,smoothed\n";
    const StageTrace& st = processed.stages;
    for (std::size_t i = 0; i < st.kept.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                    st.kept[i], st.denoised[0][i], st.denoised[1][i], st.denoised[2][i],
                    st.normalized[0][i], st.normalized[1][i], st.normalized[2][i], st.ica[i],
                    st.detrended[i], st.smoothed[i]);
      csv << buf;
    }
    write_text_file((fs::path(dir) / (std::string("stages_") + roi_name(roi) + ".csv")).string(),
                    csv.str());
  }
}

int cmd_extract(const GlobalOptions& global, const std::string& frames_dir,
                const std::string& landmarks_path, const std::string& roi_defs_path, double fps,
                const std::string& out_path) {
  (void)global;
  const auto frame_files = list_frame_files(frames_dir);
  if (frame_files.empty()) throw FormatError("extract: no frame files in '" + frames_dir + "'");
  std::vector<Image> frames;
  frames.reserve(frame_files.size());
  for (const auto& f : frame_files) frames.push_back(load_image(f));

  const auto landmarks = load_landmarks(landmarks_path);
  const auto defs =
      roi_defs_path.empty() ? default_roi_definitions() : load_roi_definitions(roi_defs_path);

  const QualityVerdict verdict = assess_recording(frames);
  if (verdict_rejects(verdict)) {
    std::cout << quality_block(verdict, "recording rejected by luminance analysis");
    return kQualityRejected;
  }

  TraceFile file;
  file.fps = fps;
  file.quality = verdict;
  file.traces = extract_traces(frames, landmarks, defs, fps);
  write_trace(file, out_path);
  std::cout << "wrote " << out_path << " (" << frames.size() << " frames, quality "
            << verdict_name(verdict) << ")\n";
  return kOk;
}

int cmd_analyze(const GlobalOptions& global, const std::string& trace_path,
                const std::string& json_out, const std::string& stages_dir) {
  const PipelineConfig cfg = global.resolve();
  const TraceFile file = load_trace(trace_path);
  if (verdict_rejects(file.quality)) {
    std::cout << quality_block(file.quality, "recording rejected by luminance analysis");
    return kQualityRejected;
  }

  const AnalysisResult analysis = analyze_full(file.traces, cfg, file.quality);
  const std::string json = report_to_json(analysis.report, cfg);
  std::cout << json;
  if (!json_out.empty()) write_text_file(json_out, json);
  if (!stages_dir.empty()) dump_stages(analysis, stages_dir);
  return kOk;
}

int cmd_evaluate(const GlobalOptions& global, const std::string& dataset_dir,
                 const std::string& gt_path, const std::string& json_out, int jobs) {
  const PipelineConfig cfg = global.resolve();
  const MaeTable table = evaluate(dataset_dir, gt_path, cfg, jobs);
  std::cout << mae_table_to_text(table);
  if (!json_out.empty()) write_text_file(json_out, mae_table_to_json(table));
  return kOk;
}

int cmd_plot(const GlobalOptions& global, const std::string& trace_path,
             const std::string& out_dir) {
  const PipelineConfig cfg = global.resolve();
  const TraceFile file = load_trace(trace_path);
  if (verdict_rejects(file.quality)) {
    std::cout << quality_block(file.quality, "recording rejected by luminance analysis");
    return kQualityRejected;
  }
  const AnalysisResult analysis = analyze_full(file.traces, cfg, file.quality);
  for (const auto& path : emit_plots(analysis, file.traces, cfg, out_dir))
    std::cout << path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face-trace vital signs: heart rate, heart-rate variability and "
               "oxygen saturation from region color traces"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Pipeline configuration JSON")
      ->envname("RPPG_CONFIG");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the ICA seed");

  auto* extract = app.add_subcommand("extract", "Compute region traces from frames + landmarks");
  std::string frames_dir, landmarks_path, roi_defs_path, out_trace;
  double fps = 30.0;
  extract->add_option("--frames", frames_dir, "Directory of frame_*.png/.ppm files")->required();
  extract->add_option("--landmarks", landmarks_path, "Landmark JSON file")->required();
  extract->add_option("--roi-defs", roi_defs_path, "Region definition JSON (built-ins when omitted)");
  extract->add_option("--fps", fps, "Frame rate of the recording")->required();
  extract->add_option("--out", out_trace, "Output trace CSV")->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Compute vitals from a trace CSV");
  std::string trace_path, json_out, stages_dir;
  analyze_cmd->add_option("trace", trace_path, "Trace CSV")->required();
  analyze_cmd->add_option("--json", json_out, "Also write the report JSON here");
  analyze_cmd->add_option("--dump-stages", stages_dir, "Write per-stage CSVs into this directory");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "MAE against a ground-truth CSV");
  std::string dataset_dir, gt_path, eval_json_out;
  int jobs = 1;
  evaluate_cmd->add_option("dataset", dataset_dir, "Dataset directory")->required();
  evaluate_cmd->add_option("truth", gt_path, "Ground-truth CSV")->required();
  evaluate_cmd->add_option("--json", eval_json_out, "Also write the MAE table JSON here");
  evaluate_cmd->add_option("--jobs", jobs, "Parallel recordings")->check(CLI::PositiveNumber);

  auto* plot_cmd = app.add_subcommand("plot", "Emit per-region CSVs and SVG charts");
  std::string plot_trace, plot_dir;
  plot_cmd->add_option("trace", plot_trace, "Trace CSV")->required();
  plot_cmd->add_option("out", plot_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  if (seed_opt->count() > 0) global.seed = seed_value;

  try {
    if (*extract) return cmd_extract(global, frames_dir, landmarks_path, roi_defs_path, fps, out_trace);
    if (*analyze_cmd) return cmd_analyze(global, trace_path, json_out, stages_dir);
    if (*evaluate_cmd) return cmd_evaluate(global, dataset_dir, gt_path, eval_json_out, jobs);
    if (*plot_cmd) return cmd_plot(global, plot_trace, plot_dir);
  } catch (const QualityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kQualityRejected;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const AnalysisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAnalysisFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
