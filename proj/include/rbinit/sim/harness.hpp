#pragma once

#include <cstdint>
#include <vector>

#include "rbinit/initializer.hpp"
#include "rbinit/sim/scenario.hpp"

namespace rbinit::sim {

/// Everything the filter needs besides the measurement streams.
struct FilterSetup {
  BaseHypotheses base;
  InitializerConfig config;
  double likelihood_sigma = 1.0;  // m
  StateVector initial_guess = StateVector::Zero();
};

/// Base hypotheses used throughout the reference experiments: heights
/// (-0.5, 0, 0.5) m, range offsets (-1, 0, +1) m, uniform weights, equal
/// bearing and heading granularity.
BaseHypotheses default_base_hypotheses(double granularity_deg = 11.25);

/// "Random seeding of the sampling": anchor the bearing and heading grids at
/// a random phase derived from the realization seed. run_realization and
/// oracle_compare apply this to every realization.
FilterSetup with_random_grid_phases(FilterSetup setup, std::uint64_t realization_seed);

struct RealizationResult {
  std::uint64_t seed = 0;
  std::vector<double> errors;          // position error (m) per ranging index
  std::vector<StateVector> estimates;  // current estimate after each ranging
  int termination_index = -1;          // first ranging index with terminated, -1 if never
  int warnings = 0;                    // discarded (underflowed) measurements
  OpCounters counters;
  std::vector<Snapshot> snapshots;     // one per ranging event
};

/// Seeds of the two independent streams inside a realization seed: one for
/// measurement/dead-reckoning noise, one for the filter's resampling draws.
/// Replays of a recorded run must use the filter stream to reproduce the
/// in-process estimates.
std::uint64_t synth_stream_seed(std::uint64_t realization_seed);
std::uint64_t filter_stream_seed(std::uint64_t realization_seed);

/// Run the initializer on streams that were already synthesized.
RealizationResult run_initializer_on(const SynthesizedRun& run,
                                     const FilterSetup& setup,
                                     std::uint64_t filter_seed);

/// Synthesize one realization and run the initializer on it. Deterministic
/// for (scenario, setup, seed).
RealizationResult run_realization(const Scenario& sc, const FilterSetup& setup,
                                  std::uint64_t seed);

struct RmseRow {
  double granularity_deg = 0.0;
  std::size_t n_particles = 0;
  int ranging_index = 0;
  double rmse_m = 0.0;
};

/// Position RMSE per ranging index for each granularity, over independent
/// realizations. Realization r reuses the same noise streams across
/// granularities so the curves are directly comparable.
std::vector<RmseRow> rmse_sweep(const Scenario& sc, const FilterSetup& setup,
                                const std::vector<double>& granularities_deg,
                                int n_realizations, std::uint64_t master_seed);

struct OracleResult {
  std::vector<double> errors;
  std::vector<StateVector> estimates;
  OpCounters counters;
};

/// Brute-force bootstrap particle filter over the current state: every
/// particle is propagated through the motion model (evaluating cos/sin of
/// its own heading each step), reweighted at rangings, and systematically
/// resampled. Serves as the correctness oracle for the initializer on
/// scenarios with exact dead reckoning.
OracleResult run_oracle_on(const SynthesizedRun& run, const FilterSetup& setup,
                           std::uint64_t filter_seed);

OracleResult oracle_filter(const Scenario& sc, const FilterSetup& setup,
                           std::uint64_t seed);

struct CompareResult {
  int n_seeds = 0;
  std::size_t n_particles = 0;
  double rmse_init = 0.0;    // final-ranging RMSE of the initializer
  double rmse_oracle = 0.0;  // final-ranging RMSE of the oracle
  std::uint64_t trig_init = 0;
  std::uint64_t trig_oracle = 0;
};

/// Run both filters on identical synthesized streams for n_seeds seeds.
/// Requires a scenario with zero dead-reckoning noise so both filters target
/// the same posterior.
CompareResult oracle_compare(const Scenario& sc, const FilterSetup& setup,
                             int n_seeds, std::uint64_t master_seed);

}  // namespace rbinit::sim
