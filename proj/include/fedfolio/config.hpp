#pragma once

#include <string>

#include "fedfolio/harness.hpp"

namespace fedfolio {

// Parses a JSON experiment configuration. Missing keys take the documented
// defaults; unknown keys are rejected; the result is fully validated.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

// Emits every field, so parse_config_text(write_config(c)) == c.
std::string write_config(const ExperimentConfig& config);

}  // namespace fedfolio
