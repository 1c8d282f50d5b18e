// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "whisperconv/pipeline.hpp"

namespace whisperconv {

/// Exit codes: 0 success, 1 invalid input or usage, 2 internal failure.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

/// Applies a JSON config document over `cfg`; unknown keys are rejected.
void apply_config_json(const std::string& json_text, PipelineConfig& cfg);

std::string version_text();

}  // namespace whisperconv
