#pragma once

#include <string>

#include "rppg/types.hpp"

namespace rppg {

// Nearest double to x written with `digits` significant decimal digits.
// Report values pass through this so serialized output is byte-stable.
double round_sig(double x, int digits = 6);

// Stable key order, floats at 6 significant digits, config hash embedded.
std::string report_to_json(const VitalsReport& report, const PipelineConfig& cfg);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rppg
