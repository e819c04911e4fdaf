#pragma once

#include <string>
#include <vector>

#include "rppg/vitals.hpp"

namespace rppg {

// One polyline on a chart panel.
struct Series {
  std::string label;
  std::string color;  // SVG color
  std::vector<double> x;
  std::vector<double> y;
  bool markers{false};  // draw dots instead of a line
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

// Minimal static line chart: stacked panels, axes, autoscaled ranges.
std::string render_svg(const std::vector<Panel>& panels, int width = 640, int panel_height = 160);

// Per region: raw RGB CSV, processed signal with peak markers CSV, PSD CSV,
// and one SVG stacking the three charts. Returns the paths written.
std::vector<std::string> emit_plots(const AnalysisResult& analysis,
                                    const std::map<RoiId, RoiTrace>& traces,
                                    const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace rppg
