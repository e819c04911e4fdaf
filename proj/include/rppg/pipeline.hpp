#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

// Spectral signal-to-noise ratio in dB: in-band magnitudes are normalized to
// unit maximum and compared inside vs outside a binary window reaching from
// the dominant peak to snr_window_bpm past it.
double snr(const std::vector<double>& samples, double fps, const PipelineConfig& cfg = {});
double snr(const Bvp& signal, const PipelineConfig& cfg = {});

// Which samples survive motion elimination. kept is empty when the signal is
// left untouched (non-negative SNR).
struct MotionPlan {
  double snr_db{0.0};
  bool applied{false};
  std::vector<std::size_t> kept;
};

MotionPlan plan_motion_elimination(const std::vector<double>& samples, double fps,
                                   const PipelineConfig& cfg = {});

Bvp eliminate_motion(const Bvp& signal, const PipelineConfig& cfg = {});

// Removes jumps larger than threshold by subtracting each offending step from
// the rest of the signal. Length-preserving; all consecutive differences of
// the output are bounded by threshold.
std::vector<double> denoise(const std::vector<double>& signal, double threshold);

// Zero mean, unit population standard deviation.
std::vector<double> normalize(const std::vector<double>& signal);

struct IcaResult {
  std::vector<double> component;
  bool fallback{false};  // degenerate input; component is the reference channel
};

// Fixed-point ICA over the three channels; returns the component best
// correlated with the reference, sign-aligned to it.
IcaResult ica_extract(const std::array<std::vector<double>, 3>& channels,
                      const std::vector<double>& reference, std::uint64_t seed);

// Smoothness-priors detrending: subtracts the solution of
// (I + lambda^2 D2' D2) y = z via a pentadiagonal factorization.
std::vector<double> detrend(const std::vector<double>& signal, double lambda);

// Trailing moving average; the first samples average the available prefix.
std::vector<double> moving_average(const std::vector<double>& signal, int len);

// Per-stage signals kept for dumps and plots.
struct StageTrace {
  std::vector<std::size_t> kept;                    // original frame indices
  std::array<std::vector<double>, 3> denoised;      // r,g,b after motion drop + denoise
  std::array<std::vector<double>, 3> normalized;    // r,g,b
  std::vector<double> ica;
  std::vector<double> detrended;
  std::vector<double> smoothed;
};

struct RoiProcessing {
  Bvp bvp;
  double snr_db{0.0};
  bool motion_compacted{false};
  bool ica_fallback{false};
  StageTrace stages;
};

// The full chain for one region: motion gate on the green channel, then
// per-channel denoise + normalization, ICA, detrending, moving average.
RoiProcessing process_roi_full(const RoiTrace& trace, const PipelineConfig& cfg);

inline Bvp process_roi(const RoiTrace& trace, const PipelineConfig& cfg) {
  return process_roi_full(trace, cfg).bvp;
}

}  // namespace rppg
