#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rppg/image.hpp"
#include "rppg/types.hpp"

namespace rppg {

inline constexpr std::size_t kLandmarkCount = 478;

// One frame's predicted face landmarks, normalized to [0,1] image coordinates.
struct LandmarkFrame {
  int frame_index{0};
  std::vector<std::array<double, 2>> points;  // exactly kLandmarkCount entries

  static LandmarkFrame make(int frame_index, std::vector<std::array<double, 2>> points);
};

// A face region as an ordered loop of landmark indices, with an optional
// subtracted interior loop (the mouth for the face-minus-mouth region).
struct RoiDefinition {
  RoiId roi{RoiId::Forehead};
  std::vector<int> polygon;
  std::vector<int> subtract;

  static RoiDefinition make(RoiId roi, std::vector<int> polygon, std::vector<int> subtract = {});
};

// Region boundaries on the 478-point face mesh; user-overridable via JSON.
std::array<RoiDefinition, 3> default_roi_definitions();

// JSON array of {roi, polygon, subtract?} objects, one per region.
std::array<RoiDefinition, 3> load_roi_definitions(const std::string& path);
void save_roi_definitions(const std::array<RoiDefinition, 3>& defs, const std::string& path);

// JSON array of {frame, points: [[x,y] x 478]}; frames must be contiguous from 0.
std::vector<LandmarkFrame> load_landmarks(const std::string& path);

struct Mask {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> bits;  // 1 inside the region

  std::size_t count() const;
};

// Rasterizes the region polygon (minus the subtracted loop) into pixel space.
Mask roi_mask(const LandmarkFrame& landmarks, const RoiDefinition& def, int width, int height);

struct ChannelMeans {
  double r{0.0}, g{0.0}, b{0.0};
};

// Arithmetic mean of each channel over masked pixels.
ChannelMeans extract_roi_means(const Image& frame, const Mask& mask);

// Per frame and per region: rasterize, average, assemble traces. Parallel
// over frames.
std::map<RoiId, RoiTrace> extract_traces(const std::vector<Image>& frames,
                                         const std::vector<LandmarkFrame>& landmarks,
                                         const std::array<RoiDefinition, 3>& defs, double fps);

// Trace CSV: `# fps=` metadata line, header `frame,roi,mean_r,mean_g,mean_b`.
// A second optional metadata line `# quality=` carries the recording verdict.
struct TraceFile {
  std::map<RoiId, RoiTrace> traces;
  double fps{0.0};
  QualityVerdict quality{QualityVerdict::Good};
};

TraceFile load_trace(const std::string& path);
void write_trace(const TraceFile& file, const std::string& path);

}  // namespace rppg
