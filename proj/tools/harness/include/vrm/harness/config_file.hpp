#pragma once

#include <filesystem>
#include <string_view>

#include "vrm/config.hpp"

namespace vrm::harness {

// Sets one parameter by its flag name without the leading dashes
// ("c-diff" and "c_diff" are equivalent). Throws ConfigError.
void apply_setting(SimulationConfig& config, std::string_view key, std::string_view value);

// Line-based `key = value` file; '#' starts a comment.
void load_config_file(const std::filesystem::path& path, SimulationConfig& config);

}  // namespace vrm::harness
