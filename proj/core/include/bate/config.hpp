#pragma once

#include <string>
#include <vector>

#include "bate/sim.hpp"

namespace bate {

/// Strict JSON -> ScenarioConfig. Unknown keys anywhere in the document are
/// rejected; missing keys fall back to documented defaults.
ScenarioConfig parse_scenario_config(const std::string& json_text);

/// Canonical serialization (sorted keys, full precision). parse of the
/// result reproduces the configuration exactly.
std::string serialize_scenario_config(const ScenarioConfig& cfg, int indent = 2);

/// Built-in scenario presets.
std::vector<std::string> preset_names();
ScenarioConfig preset_config(const std::string& name);

/// FNV-1a 64 over the canonical serialization, as a 16-char hex string.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace bate
