#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rbinit/dead_reckoning.hpp"
#include "rbinit/initializer.hpp"
#include "rbinit/types.hpp"

namespace rbinit::sim {

/// Two-agent scenario: both trajectories as waypoint lists, the ranging
/// events as (ref waypoint index, agent waypoint index) pairs, and the noise
/// parameters. Waypoints are in meters; trajectories are traversed in 1 m
/// legs by default.
struct Scenario {
  std::vector<Eigen::Vector3d> ref_waypoints;
  std::vector<Eigen::Vector3d> agent_waypoints;
  std::vector<std::pair<int, int>> ranging_schedule;
  double step_length = 1.0;        // m
  double range_noise_scale = 1.0;  // Cauchy scale sigma, m
  Eigen::Vector4d dr_noise_diag = Eigen::Vector4d::Zero();  // per-step variances

  void validate() const;  // throws std::invalid_argument
};

/// The reference scenario: two agents, roughly 150 m of traversal for the
/// initializing agent, eight ranging events, sigma = 1 m Cauchy range noise
/// and exact dead reckoning.
Scenario build_default_scenario();

/// Variant with the initializing agent pinned to its first waypoint (no
/// motion between rangings). Used to exercise the motion requirement.
Scenario make_static_agent_variant(const Scenario& sc);

struct DeadReckoningEvent {
  double t = 0.0;  // step index at which the increment completes
  DeadReckoningIncrement u;
};

struct SynthRangeEvent {
  double t = 0.0;
  std::size_t after_step = 0;  // fires once increments[0..after_step-1] applied
  RangeMeasurement meas;
};

/// One synthesized realization: noisy increment and measurement streams plus
/// the ground truth they were generated from.
struct SynthesizedRun {
  std::vector<DeadReckoningEvent> increments;
  std::vector<SynthRangeEvent> measurements;
  std::vector<StateVector> truth;  // truth[k] = pose after k steps
  std::vector<StateVector> truth_at_ranging;
};

/// Deterministic for a given (scenario, seed). Range noise is unclipped
/// Cauchy via inverse CDF (negative outliers are floored at range 0);
/// dead-reckoning noise is Gaussian per component of the agent-frame
/// increment.
SynthesizedRun synthesize(const Scenario& sc, std::uint64_t noise_seed);

}  // namespace rbinit::sim
