#pragma once

#include <string>

#include "rbinit/sim/scenario.hpp"

namespace rbinit::io {

/// Scenario file schema: a JSON object with "ref_waypoints" and
/// "agent_waypoints" (arrays of [x, y, z] in meters), "ranging_schedule"
/// (array of [ref_index, agent_index]), "sigma" (Cauchy range-noise scale,
/// m) and "dr_noise_diag" (4 per-step variances). An optional "step_length"
/// overrides the 1 m default.
sim::Scenario load_scenario(const std::string& path);

void save_scenario(const sim::Scenario& sc, const std::string& path);

}  // namespace rbinit::io
