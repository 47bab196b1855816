#pragma once

// JSON scenario configuration, built-in presets and vessel assembly.
//
// Physical fields carry their unit in the key (`_kPa`, `_Pa`, `_cm`,
// `_per_day`, `_dyn_s_cm5`, ...). A `preset` key names a built-in table that
// the remaining keys override (JSON merge patch).

#include "cmv/coupling.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cmv {

struct ScenarioConfig {
    std::string name;
    nlohmann::json resolved;  ///< full configuration after preset resolution
    CouplingConfig coupling;
    Vessel vessel;            ///< assembled, not yet initialized
    std::vector<std::string> constituent_names;  ///< union over regions, CSV order
    int output_cadence = 1;
};

std::vector<std::string> preset_names();
/// The built-in table for a preset, itself possibly inheriting from another.
nlohmann::json preset_json(const std::string& name);

/// Expands `preset` inheritance. The result has no `preset` key.
nlohmann::json resolve_config(const nlohmann::json& raw);

/// Validates a resolved configuration and assembles the vessel.
ScenarioConfig build_scenario(const nlohmann::json& resolved);

ScenarioConfig load_config(const std::string& path);
ScenarioConfig load_preset(const std::string& name);

/// Sets a dotted parameter path such as `hemodynamics.R`. A final key may
/// omit its unit suffix when exactly one suffixed key matches.
void set_parameter(nlohmann::json& config, const std::string& path, double value);

} // namespace cmv
