#pragma once

#include <stdexcept>
#include <string>

namespace rppg {

// Input parsing, file I/O and type-invariant violations. CLI exit code 3.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Recording rejected by the luminance quality gate. CLI exit code 2.
struct QualityError : std::runtime_error {
  explicit QualityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Signal unusable for analysis (flat ROI, no spectrum, too few peaks...).
// CLI exit code 4.
struct AnalysisError : std::runtime_error {
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rppg
