#pragma once

#include <vector>

#include "rppg/image.hpp"
#include "rppg/ingest.hpp"
#include "rppg/types.hpp"

// Serial reference implementations. These mirror the production kernels with
// the most direct formulation available (naive transforms, dense solves,
// literal pseudocode walks). They back the test suite's oracle checks and the
// benchmark's correctness column, and are never linked into the main library.
namespace rppg::ref {

// Full naive transform of the mean-removed signal; |X_k| for k = 0..N/2.
std::vector<double> dft_magnitude(const std::vector<double>& x);

// In-band window SNR evaluated directly from the naive transform.
double snr_db(const std::vector<double>& x, double fps, const PipelineConfig& cfg = {});

// Step-removal filter as a literal list walk: subtract each oversized step
// from the whole suffix and retest at the same index.
std::vector<double> denoise_literal(std::vector<double> signal, double threshold);

// z - (I + lambda^2 D2'D2)^(-1) z with the operator built densely and
// inverted by Gauss-Jordan elimination.
std::vector<double> detrend_dense(const std::vector<double>& z, double lambda);

// Welch estimate with a naive per-segment transform.
Psd welch_naive(const std::vector<double>& x, double fps, const PipelineConfig& cfg = {});

// Per-pixel double loop over the mask.
ChannelMeans masked_means_naive(const Image& frame, const Mask& mask);

}  // namespace rppg::ref
