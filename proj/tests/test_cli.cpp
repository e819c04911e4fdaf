#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "rppg/image.hpp"
#include "rppg/ingest.hpp"

using namespace rppg;
using testutil::TempDir;

namespace {

struct RunResult {
  int exit_code{-1};
  std::string out;
};

// Runs the installed binary with stdout captured; stderr goes to a sidecar.
RunResult run_cli(const std::string& args, const std::string& scratch) {
  const std::string out_path = scratch + "/stdout.txt";
  const std::string cmd = std::string(RPPG_CLI_PATH) + " " + args + " > " + out_path + " 2> " +
                          scratch + "/stderr.txt";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::slurp(out_path);
  return r;
}

void write_tone_trace(const std::string& path, double tone_hz,
                      QualityVerdict quality = QualityVerdict::Good) {
  testutil::ToneSpec spec;
  spec.tone_hz = tone_hz;
  spec.noise_sigma = 0.05;
  spec.red_amplitude = 0.3;
  spec.blue_amplitude = 0.15;
  TraceFile file;
  file.fps = spec.fps;
  file.quality = quality;
  for (RoiId roi : kAllRois) file.traces.emplace(roi, testutil::make_tone_trace(roi, spec));
  write_trace(file, path);
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("analyze reports the tone and is byte-deterministic") {
  TempDir dir("cli_an");
  write_tone_trace(dir.file("t.csv"), 1.21);

  const RunResult r1 = run_cli("analyze " + dir.file("t.csv") + " --json " + dir.file("r.json"),
                               dir.str());
  REQUIRE(r1.exit_code == 0);

  const auto j = nlohmann::json::parse(r1.out);
  CHECK(std::abs(j.at("hr_bpm").get<double>() - 72.6) < 1.0);
  CHECK(j.at("quality") == "good");
  CHECK(j.contains("config_hash"));
  CHECK(j.at("per_roi_peak_power").size() == 3);
  CHECK(testutil::slurp(dir.file("r.json")) == r1.out);

  const RunResult r2 = run_cli("analyze " + dir.file("t.csv"), dir.str());
  CHECK(r2.exit_code == 0);
  CHECK(r2.out == r1.out);
}

TEST_CASE("analyze exit codes") {
  TempDir dir("cli_codes");

  // flat trace: analysis failure
  {
    std::ofstream out(dir.file("flat.csv"));
    out << "# fps=30\nframe,roi,mean_r,mean_g,mean_b\n";
    for (int i = 0; i < 64; ++i) out << i << ",forehead,10,10,10\n";
  }
  CHECK(run_cli("analyze " + dir.file("flat.csv"), dir.str()).exit_code == 4);

  // gated trace: quality rejection with a JSON quality block
  write_tone_trace(dir.file("dark.csv"), 1.2, QualityVerdict::TooDark);
  const RunResult gated = run_cli("analyze " + dir.file("dark.csv"), dir.str());
  CHECK(gated.exit_code == 2);
  CHECK(nlohmann::json::parse(gated.out).at("quality") == "too_dark");

  // missing input
  CHECK(run_cli("analyze " + dir.file("nope.csv"), dir.str()).exit_code == 3);

  // malformed row
  {
    std::ofstream out(dir.file("bad.csv"));
    out << "# fps=30\nframe,roi,mean_r,mean_g,mean_b\n0,forehead,1,999,1\n1,forehead,1,2,1\n";
  }
  CHECK(run_cli("analyze " + dir.file("bad.csv"), dir.str()).exit_code == 3);

  // unknown flag
  CHECK(run_cli("analyze --bogus x", dir.str()).exit_code == 3);
}

TEST_CASE("config overrides change the reported hash") {
  TempDir dir("cli_cfg");
  write_tone_trace(dir.file("t.csv"), 1.2);

  const RunResult base = run_cli("analyze " + dir.file("t.csv"), dir.str());
  REQUIRE(base.exit_code == 0);

  {
    std::ofstream out(dir.file("cfg.json"));
    out << R"({"detrend_lambda": 20.0})";
  }
  const RunResult tuned = run_cli(
      "--config " + dir.file("cfg.json") + " analyze " + dir.file("t.csv"), dir.str());
  REQUIRE(tuned.exit_code == 0);
  CHECK(nlohmann::json::parse(base.out).at("config_hash") !=
        nlohmann::json::parse(tuned.out).at("config_hash"));

  // the config can also arrive through the environment
  const std::string cmd = "RPPG_CONFIG=" + dir.file("cfg.json") + " " + RPPG_CLI_PATH +
                          " analyze " + dir.file("t.csv") + " > " + dir.file("env_out.json") +
                          " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(nlohmann::json::parse(testutil::slurp(dir.file("env_out.json"))).at("config_hash") ==
        nlohmann::json::parse(tuned.out).at("config_hash"));

  // --seed feeds the ICA seed into the resolved configuration
  const RunResult seeded = run_cli("--seed 7 analyze " + dir.file("t.csv"), dir.str());
  REQUIRE(seeded.exit_code == 0);
  CHECK(nlohmann::json::parse(seeded.out).at("config_hash") !=
        nlohmann::json::parse(base.out).at("config_hash"));
}

TEST_CASE("dump-stages writes per-region stage csvs") {
  TempDir dir("cli_stages");
  write_tone_trace(dir.file("t.csv"), 1.2);
  const RunResult r = run_cli(
      "analyze " + dir.file("t.csv") + " --dump-stages " + dir.file("stages"), dir.str());
  REQUIRE(r.exit_code == 0);
  for (const char* roi : {"forehead", "cheeknose", "facenomouth"}) {
    const std::string csv = testutil::slurp(dir.file("stages") + "/stages_" + roi + ".csv");
    CHECK(csv.find("denoised_g") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 500);
  }
}

TEST_CASE("extract then analyze a synthetic recording") {
  TempDir dir("cli_ex");
  const std::string frames = dir.file("frames");
  std::filesystem::create_directories(frames);

  const int n = 150;
  testutil::SquareSceneClip clip;
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.ppm", i);
    save_ppm(clip.frame(i), frames + "/" + name);
  }
  testutil::write_square_scene_landmarks(dir.file("landmarks.json"), n);

  std::ofstream defs(dir.file("defs.json"));
  defs << testutil::square_scene_defs_json();
  defs.close();

  const RunResult ex = run_cli("extract --frames " + frames + " --landmarks " +
                                   dir.file("landmarks.json") + " --roi-defs " + dir.file("defs.json") +
                                   " --fps 30 --out " + dir.file("trace.csv"),
                               dir.str());
  REQUIRE(ex.exit_code == 0);
  REQUIRE(std::filesystem::exists(dir.file("trace.csv")));

  const RunResult an = run_cli("analyze " + dir.file("trace.csv"), dir.str());
  REQUIRE(an.exit_code == 0);
  CHECK(std::abs(nlohmann::json::parse(an.out).at("hr_bpm").get<double>() - 72.0) < 1.5);

  // missing landmarks path: input error naming the file
  const RunResult missing = run_cli("extract --frames " + frames + " --landmarks " +
                                        dir.file("ghost.json") + " --fps 30 --out " +
                                        dir.file("x.csv"),
                                    dir.str());
  CHECK(missing.exit_code == 3);
  CHECK(testutil::slurp(dir.str() + "/stderr.txt").find("ghost.json") != std::string::npos);

  // frame/landmark count mismatch
  std::filesystem::remove(frames + "/frame_000149.ppm");
  const RunResult mismatch = run_cli("extract --frames " + frames + " --landmarks " +
                                         dir.file("landmarks.json") + " --roi-defs " +
                                         dir.file("defs.json") + " --fps 30 --out " +
                                         dir.file("y.csv"),
                                     dir.str());
  CHECK(mismatch.exit_code == 3);
}

TEST_CASE("plot emits the per-region csvs and charts") {
  TempDir dir("cli_plot");
  write_tone_trace(dir.file("t.csv"), 1.21);

  const RunResult an = run_cli("analyze " + dir.file("t.csv"), dir.str());
  REQUIRE(an.exit_code == 0);
  const double hr = nlohmann::json::parse(an.out).at("hr_bpm").get<double>();
  const std::string selected = nlohmann::json::parse(an.out).at("selected_roi").get<std::string>();

  const RunResult pl = run_cli("plot " + dir.file("t.csv") + " " + dir.file("charts"), dir.str());
  REQUIRE(pl.exit_code == 0);

  int csvs = 0, svgs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.file("charts"))) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".csv") ++csvs;
    if (ext == ".svg") ++svgs;
  }
  CHECK(csvs == 9);
  CHECK(svgs == 3);

  // the argmax row of the selected region's spectrum matches hr/60
  std::ifstream psd(dir.file("charts") + "/psd_" + selected + ".csv");
  std::string line;
  std::getline(psd, line);  // header
  double best_f = 0.0, best_p = -1.0;
  while (std::getline(psd, line)) {
    const auto comma = line.find(',');
    const double f = std::stod(line.substr(0, comma));
    const double p = std::stod(line.substr(comma + 1));
    if (f >= 0.5 && f <= 4.0 && p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // hr carries six-digit report rounding, the CSV nine; allow for both
  CHECK(best_f == doctest::Approx(hr / 60.0).epsilon(1e-6));

  // peak rows are separated by at least the configured distance
  std::ifstream bvp(dir.file("charts") + "/bvp_" + selected + ".csv");
  std::getline(bvp, line);
  double prev = -1.0;
  while (std::getline(bvp, line)) {
    if (line.empty() || line.back() != '1') continue;
    const double t = std::stod(line.substr(0, line.find(',')));
    if (prev >= 0.0) CHECK(t - prev >= 0.25);
    prev = t;
  }
  CHECK(prev > 0.0);

  // flat trace: analysis failure surfaces through plot as well
  {
    std::ofstream out(dir.file("flat.csv"));
    out << "# fps=30\nframe,roi,mean_r,mean_g,mean_b\n";
    for (int i = 0; i < 64; ++i) out << i << ",forehead,10,10,10\n";
  }
  CHECK(run_cli("plot " + dir.file("flat.csv") + " " + dir.file("c2"), dir.str()).exit_code == 4);
}

TEST_CASE("evaluate from the command line") {
  TempDir dir("cli_eval");
  write_tone_trace(dir.file("r1.csv"), 1.2);
  write_tone_trace(dir.file("r2.csv"), 1.0);
  {
    std::ofstream out(dir.file("gt.csv"));
    out << "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\nr1,steady,72,,\nr2,talking,60,,\n";
  }

  const RunResult r = run_cli("evaluate " + dir.str() + " " + dir.file("gt.csv") + " --json " +
                                  dir.file("table.json") + " --jobs 2",
                              dir.str());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("HR (bpm)") != std::string::npos);

  const auto j = nlohmann::json::parse(testutil::slurp(dir.file("table.json")));
  CHECK(j.at("rows").at("hr_bpm").at("overall_pooled").at("n") == 2);

  // empty ground truth: input error
  {
    std::ofstream out(dir.file("gt_empty.csv"));
    out << "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\n";
  }
  CHECK(run_cli("evaluate " + dir.str() + " " + dir.file("gt_empty.csv"), dir.str()).exit_code == 3);

  // every recording gated: analysis failure
  write_tone_trace(dir.file("dark.csv"), 1.2, QualityVerdict::LowContrast);
  {
    std::ofstream out(dir.file("gt_dark.csv"));
    out << "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\ndark,steady,70,,\n";
  }
  CHECK(run_cli("evaluate " + dir.str() + " " + dir.file("gt_dark.csv"), dir.str()).exit_code == 4);
}

TEST_SUITE_END();
