#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rppg/ingest.hpp"
#include "rppg/types.hpp"

namespace testutil {

// Parameters of a synthetic cardiac trace: a tone in the green channel over a
// DC level, plus the usual nuisances (linear trend, one step, white noise).
struct ToneSpec {
  double tone_hz{1.2};
  double fps{30.0};
  double seconds{20.0};
  double amplitude{1.0};
  double dc{120.0};
  double trend_per_s{0.0};
  double step_at_s{-1.0};  // < 0 disables the step
  double step_height{0.0};
  double noise_sigma{0.0};
  std::uint64_t seed{1};
  double red_amplitude{0.0};   // tone leakage into red
  double blue_amplitude{0.0};  // tone leakage into blue
};

inline rppg::RoiTrace make_tone_trace(rppg::RoiId roi, const ToneSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(std::lround(spec.seconds * spec.fps));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.fps;
    const double tone = std::sin(2.0 * M_PI * spec.tone_hz * t);
    double base = spec.dc + spec.trend_per_s * t;
    if (spec.step_at_s >= 0.0 && t >= spec.step_at_s) base += spec.step_height;
    r[i] = base + spec.red_amplitude * tone + spec.noise_sigma * gauss(rng);
    g[i] = base + spec.amplitude * tone + spec.noise_sigma * gauss(rng);
    b[i] = base + spec.blue_amplitude * tone + spec.noise_sigma * gauss(rng);
  }
  auto clamp_all = [](std::vector<double>& v) {
    for (double& x : v) x = std::min(255.0, std::max(0.0, x));
  };
  clamp_all(r);
  clamp_all(g);
  clamp_all(b);
  return rppg::RoiTrace::make(roi, spec.fps, std::move(r), std::move(g), std::move(b));
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rppg_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Landmark frame with every point at (0.5, 0.5) except the listed overrides.
inline rppg::LandmarkFrame landmarks_with(
    int frame_index, const std::vector<std::pair<int, std::array<double, 2>>>& overrides) {
  std::vector<std::array<double, 2>> pts(rppg::kLandmarkCount, {0.5, 0.5});
  for (const auto& [idx, xy] : overrides) pts[static_cast<std::size_t>(idx)] = xy;
  return rppg::LandmarkFrame::make(frame_index, std::move(pts));
}

// A 64x64 synthetic face stand-in: three 16x16 "region" squares carrying the
// given channel values, a contrast strip at the bottom, and a neutral
// background. Square pixels dither between adjacent levels so the region
// means hit the requested doubles despite 8-bit storage.
inline rppg::Image square_scene_frame(double rv, double gv, double bv) {
  rppg::Image f(64, 64);
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    f.pixels[3 * p] = 120;
    f.pixels[3 * p + 1] = 150;
    f.pixels[3 * p + 2] = 110;
  }
  auto paint = [&](int x0, int y0) {
    const double vals[3] = {rv, gv, bv};
    for (int c = 0; c < 3; ++c) {
      const double lo = std::floor(vals[c]);
      const int up = static_cast<int>(std::lround(256.0 * (vals[c] - lo)));
      int idx = 0;
      for (int y = y0; y < y0 + 16; ++y)
        for (int x = x0; x < x0 + 16; ++x, ++idx)
          f.at(x, y)[c] = static_cast<std::uint8_t>(lo + (idx < up ? 1 : 0));
    }
  };
  paint(3, 3);    // forehead square (0.05-0.30)
  paint(26, 3);   // cheek+nose square (0.40-0.65)
  paint(45, 38);  // face square (0.70-0.95 x 0.60-0.85)
  for (int x = 0; x < 64; ++x)
    for (int c = 0; c < 3; ++c) {
      f.at(x, 62)[c] = 0;
      f.at(x, 63)[c] = 255;
    }
  return f;
}

// Channel means for frame i of the square-scene clip: a cardiac tone plus
// mild sensor noise, scaled to survive the step-removal filter.
struct SquareSceneClip {
  double fps{30.0};
  double tone_hz{1.2};
  std::mt19937_64 rng{12345};
  std::normal_distribution<double> noise{0.0, 0.1};

  rppg::Image frame(int i) {
    const double s = std::sin(2.0 * M_PI * tone_hz * i / fps);
    return square_scene_frame(120.0 + 0.8 * s + noise(rng), 150.0 + 2.0 * s + noise(rng),
                              110.0 + 0.4 * s + noise(rng));
  }
};

// Landmark file matching square_scene_frame: indices 0-11 bound the squares.
inline void write_square_scene_landmarks(const std::string& path, int frames) {
  static const char* kPoints[12] = {"[0.05,0.05]", "[0.30,0.05]", "[0.30,0.30]", "[0.05,0.30]",
                                    "[0.40,0.05]", "[0.65,0.05]", "[0.65,0.30]", "[0.40,0.30]",
                                    "[0.70,0.60]", "[0.95,0.60]", "[0.95,0.85]", "[0.70,0.85]"};
  std::ofstream out(path);
  out << "[";
  for (int i = 0; i < frames; ++i) {
    out << (i ? "," : "") << "{\"frame\":" << i << ",\"points\":[";
    for (int p = 0; p < 478; ++p) {
      if (p) out << ",";
      out << (p < 12 ? kPoints[p] : "[0.5,0.5]");
    }
    out << "]}";
  }
  out << "]";
}

inline std::string square_scene_defs_json() {
  return R"([{"roi":"forehead","polygon":[0,1,2,3]},
             {"roi":"cheeknose","polygon":[4,5,6,7]},
             {"roi":"facenomouth","polygon":[8,9,10,11]}])";
}

}  // namespace testutil
