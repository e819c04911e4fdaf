#pragma once

#include <vector>

#include "rppg/image.hpp"
#include "rppg/types.hpp"

namespace rppg {

// Per-frame brightness/contrast summary.
struct FrameStats {
  double mean_gray{0.0};
  double p1_gray{0.0};
  double p99_gray{0.0};
  double mean_y{0.0};  // equals mean_gray; both derive from the same luma plane
};

struct LuminanceOptions {
  double dark_mean{75.0};           // below this, equalization is attempted
  double contrast_threshold{0.65};  // (p99 - p1) / 255 below this is low contrast
  double y_var_threshold{15.0};     // max-min of per-frame mean Y beyond this is varying light
};

FrameStats frame_stats(const Image& frame);

// Parallel over frames.
std::vector<FrameStats> frame_stats_batch(const std::vector<Image>& frames);

bool is_low_contrast(const FrameStats& stats, double threshold = 0.65);

// Verdict from per-frame stats. Precedence: low contrast (median frame),
// varying light, enhancement needed, good. Never returns TooDark; that
// verdict needs a second pass over equalized frames (see assess_recording).
QualityVerdict assess(const std::vector<FrameStats>& stats, double y_var_threshold = 15.0);

// Luma-channel histogram equalization; chroma kept by scaling RGB with the
// luma ratio.
Image hist_equalize(const Image& frame);

// Full recording gate. Dark recordings are equalized and re-checked; a dark
// recording that stays low-contrast after equalization is TooDark. When the
// verdict is Enhanced, frames are replaced by their equalized versions.
QualityVerdict assess_recording(std::vector<Image>& frames,
                                const LuminanceOptions& opt = LuminanceOptions{});

}  // namespace rppg
