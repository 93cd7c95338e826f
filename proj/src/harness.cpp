#include "rbinit/sim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "rbinit/angles.hpp"
#include "rbinit/likelihood.hpp"
#include "rbinit/pose.hpp"
#include "rbinit/random.hpp"

namespace rbinit::sim {
namespace {

constexpr std::uint64_t kStreamSynth = 0x53594E5448ULL;    // "SYNTH"
constexpr std::uint64_t kStreamFilter = 0x46494C54ULL;     // "FILT"
constexpr std::uint64_t kStreamOracle = 0x4F5241434CULL;   // "ORACL"
constexpr std::uint64_t kStreamRealization = 0x5245414CULL;
constexpr std::uint64_t kStreamGridPhase = 0x50484153ULL;  // "PHAS"

// Runs f(0..n-1), fanned out over hardware threads in fixed chunks. Each
// index owns its output slot, so the result does not depend on the split.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = unsigned(std::min<std::size_t>(hw, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct OracleParticle {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double theta = 0.0;
  double weight = 0.0;
};

double effective_sample_size(const std::vector<OracleParticle>& ps) {
  double sq = 0.0;
  for (const auto& p : ps) sq += p.weight * p.weight;
  return 1.0 / sq;
}

}  // namespace

std::uint64_t synth_stream_seed(std::uint64_t realization_seed) {
  return derive_seed(realization_seed, kStreamSynth);
}

FilterSetup with_random_grid_phases(FilterSetup setup, std::uint64_t realization_seed) {
  Rng rng(derive_seed(realization_seed, kStreamGridPhase));
  setup.base.bearing_phase = rng.uniform(0.0, setup.base.bearing_granularity);
  setup.base.heading_phase = rng.uniform(0.0, setup.base.heading_granularity);
  return setup;
}

std::uint64_t filter_stream_seed(std::uint64_t realization_seed) {
  return derive_seed(realization_seed, kStreamFilter);
}

BaseHypotheses default_base_hypotheses(double granularity_deg) {
  BaseHypotheses base;
  base.heights = {-0.5, 0.0, 0.5};
  base.range_offsets = {-1.0, 0.0, 1.0};
  base.bearing_granularity = deg_to_rad(granularity_deg);
  base.heading_granularity = deg_to_rad(granularity_deg);
  return base;
}

RealizationResult run_initializer_on(const SynthesizedRun& run,
                                     const FilterSetup& setup,
                                     std::uint64_t filter_seed) {
  setup.base.validate();
  setup.config.validate();
  const CauchyLikelihood likelihood(setup.likelihood_sigma);
  Rng rng(filter_seed);
  RngGaussianSource gauss(rng);


  RealizationResult result;
  result.seed = filter_seed;

  InitializerState state;
  DeadReckoningTrack pre_seed_track;  // zero track before the first ranging
  bool seeded = false;

  std::size_t next_inc = 0;
  for (std::size_t j = 0; j < run.measurements.size(); ++j) {
    const SynthRangeEvent& ev = run.measurements[j];
    while (next_inc < ev.after_step && next_inc < run.increments.size()) {
      if (seeded) {
        apply_increment(state, run.increments[next_inc].u);
      } else {
        pre_seed_track = propagate(pre_seed_track, run.increments[next_inc].u);
      }
      ++next_inc;
    }

    if (!seeded) {
      state = seed(ev.meas, pre_seed_track, setup.base, likelihood,
                   setup.initial_guess);
      seeded = true;
      result.snapshots.push_back(make_snapshot(state));
    } else if (!state.terminated) {
      Snapshot snap;
      const UpdateOutcome outcome =
          process_measurement(state, ev.meas, likelihood, setup.config, gauss, &snap);
      if (outcome == UpdateOutcome::kDiscardedUnderflow) ++result.warnings;
      result.snapshots.push_back(std::move(snap));
      if (state.terminated && result.termination_index < 0) {
        result.termination_index = int(j);
      }
    } else {
      // Past termination the estimate just dead-reckons from the handoff.
      Snapshot snap = make_snapshot(state);
      snap.ell = int(j);
      result.snapshots.push_back(std::move(snap));
    }

    const auto [x_hat, p_hat] = current_estimate(state);
    result.estimates.push_back(x_hat);
    if (!run.truth_at_ranging.empty()) {
      const Eigen::Vector3d err =
          x_hat.head<3>() - run.truth_at_ranging[j].head<3>();
      result.errors.push_back(err.norm());
    }
  }
  result.counters = state.counters;
  return result;
}

RealizationResult run_realization(const Scenario& sc, const FilterSetup& setup,
                                  std::uint64_t seed) {
  const SynthesizedRun run = synthesize(sc, derive_seed(seed, kStreamSynth));
  RealizationResult result = run_initializer_on(
      run, with_random_grid_phases(setup, seed), derive_seed(seed, kStreamFilter));
  result.seed = seed;
  return result;
}

std::vector<RmseRow> rmse_sweep(const Scenario& sc, const FilterSetup& setup,
                                const std::vector<double>& granularities_deg,
                                int n_realizations, std::uint64_t master_seed) {
  if (n_realizations < 1) throw std::invalid_argument("need >= 1 realization");
  const std::size_t n_events = sc.ranging_schedule.size();

  std::vector<RmseRow> rows;
  for (double gdeg : granularities_deg) {
    FilterSetup gs = setup;
    gs.base.bearing_granularity = deg_to_rad(gdeg);
    gs.base.heading_granularity = deg_to_rad(gdeg);
    gs.base.validate();

    std::vector<std::vector<double>> errors(static_cast<std::size_t>(n_realizations));
    parallel_for(std::size_t(n_realizations), [&](std::size_t r) {
      const std::uint64_t seed = derive_seed(master_seed, kStreamRealization, r);
      errors[r] = run_realization(sc, gs, seed).errors;
    });

    for (std::size_t j = 0; j < n_events; ++j) {
      double sum_sq = 0.0;
      for (int r = 0; r < n_realizations; ++r) {
        sum_sq += errors[std::size_t(r)][j] * errors[std::size_t(r)][j];
      }
      rows.push_back({gdeg, gs.base.particle_count(), int(j),
                      std::sqrt(sum_sq / n_realizations)});
    }
  }
  return rows;
}

OracleResult run_oracle_on(const SynthesizedRun& run, const FilterSetup& setup,
                           std::uint64_t filter_seed) {
  setup.base.validate();
  const CauchyLikelihood likelihood(setup.likelihood_sigma);
  Rng rng(filter_seed);
  const BaseHypotheses& base = setup.base;

  OracleResult result;
  std::vector<OracleParticle> particles;

  // Dead reckoning before the first ranging is deterministic, so the known
  // accumulated climb and heading change just shift the hypothesis grids.
  DeadReckoningTrack pre_track;
  std::size_t next_inc = 0;
  bool seeded = false;

  for (std::size_t j = 0; j < run.measurements.size(); ++j) {
    const SynthRangeEvent& ev = run.measurements[j];
    while (next_inc < ev.after_step && next_inc < run.increments.size()) {
      const DeadReckoningIncrement& u = run.increments[next_inc].u;
      if (!seeded) {
        pre_track = propagate(pre_track, u);
      } else {
        // Bootstrap propagation through the motion model, process noise
        // included: every particle turns and steps with its own heading,
        // costing a cos/sin pair per particle and step.
        const Eigen::Vector4d q_sd = u.q.diagonal().cwiseSqrt();
        const bool noisy = (q_sd.array() > 0.0).any();
        for (OracleParticle& p : particles) {
          const double c = std::cos(p.theta);
          const double s = std::sin(p.theta);
          double dx = u.dx, dy = u.dy, dz = u.dz, dth = u.dtheta;
          if (noisy) {
            dx += q_sd[0] * rng.normal();
            dy += q_sd[1] * rng.normal();
            dz += q_sd[2] * rng.normal();
            dth += q_sd[3] * rng.normal();
          }
          p.p[0] += c * dx - s * dy;
          p.p[1] += s * dx + c * dy;
          p.p[2] += dz;
          p.theta = wrap_angle(p.theta + dth);
        }
        result.counters.trig += 2 * particles.size();
      }
      ++next_inc;
    }

    if (!seeded) {
      // Same torus geometry as the initializer, but hypothesizing the
      // current state directly.
      const int nb = base.bearing_count();
      const int nh = base.heading_count();
      const Eigen::Vector3d& ref = ev.meas.ref_position;
      particles.reserve(base.particle_count());
      for (std::size_t ih = 0; ih < base.heights.size(); ++ih) {
        const double h = base.heights[ih];
        const double wh = base.height_weights.empty()
                              ? 1.0
                              : base.height_weights[ih];
        const double dz = ref[2] - pre_track.mean[kZ] - h;
        for (double off : base.range_offsets) {
          const double r = std::max(ev.meas.value + off, 0.0);
          const double wr = likelihood.evaluate(r, ev.meas.value);
          const double rbar = std::sqrt(std::abs(r * r - dz * dz));
          for (int n = 0; n < nb; ++n) {
            const double chi = base.bearing_phase + n * base.bearing_granularity;
            result.counters.trig += 2;
            const double ox = rbar * std::cos(chi);
            const double oy = rbar * std::sin(chi);
            for (int m = 0; m < nh; ++m) {
              const double theta0 = base.heading_phase + m * base.heading_granularity;
              const double wt = base.heading_weights.empty()
                                    ? 1.0
                                    : base.heading_weights[std::size_t(m)];
              OracleParticle p;
              p.p = ref - Eigen::Vector3d(ox, oy, dz);
              p.theta = wrap_angle(theta0 + pre_track.mean[kTheta]);
              p.weight = wh * wr * wt;
              particles.push_back(p);
            }
          }
        }
      }
      seeded = true;
    } else {
      std::vector<double> prior(particles.size());
      double total = 0.0;
      for (std::size_t i = 0; i < particles.size(); ++i) {
        prior[i] = particles[i].weight;
        const double r_hat = (particles[i].p - ev.meas.ref_position).norm();
        particles[i].weight *= likelihood.evaluate(ev.meas.value, r_hat);
        total += particles[i].weight;
      }
      if (total < 1e-300) {
        // Mirror the initializer's underflow policy: drop the measurement.
        for (std::size_t i = 0; i < particles.size(); ++i) {
          particles[i].weight = prior[i];
        }
      } else {
        for (OracleParticle& p : particles) p.weight /= total;
      }
    }

    if (j == 0) {
      double total = 0.0;
      for (const OracleParticle& p : particles) total += p.weight;
      for (OracleParticle& p : particles) p.weight /= total;
    }

    StateVector est = StateVector::Zero();
    double sin_sum = 0.0, cos_sum = 0.0;
    for (const OracleParticle& p : particles) {
      est.head<3>() += p.weight * p.p;
      sin_sum += p.weight * std::sin(p.theta);
      cos_sum += p.weight * std::cos(p.theta);
    }
    result.counters.trig += 2 * particles.size();
    est[kTheta] = std::atan2(sin_sum, cos_sum);
    result.estimates.push_back(est);
    if (!run.truth_at_ranging.empty()) {
      result.errors.push_back(
          (est.head<3>() - run.truth_at_ranging[j].head<3>()).norm());
    }

    // Systematic resampling when the effective sample size collapses.
    const double n = double(particles.size());
    if (effective_sample_size(particles) < n / 2.0) {
      std::vector<OracleParticle> fresh;
      fresh.reserve(particles.size());
      const double u0 = rng.uniform() / n;
      double cum = particles[0].weight;
      std::size_t i = 0;
      for (std::size_t k = 0; k < particles.size(); ++k) {
        const double target = u0 + double(k) / n;
        while (cum < target && i + 1 < particles.size()) cum += particles[++i].weight;
        fresh.push_back(particles[i]);
        fresh.back().weight = 1.0 / n;
      }
      particles = std::move(fresh);
    }
  }
  return result;
}

OracleResult oracle_filter(const Scenario& sc, const FilterSetup& setup,
                           std::uint64_t seed) {
  if ((sc.dr_noise_diag.array() > 0.0).any()) {
    throw std::invalid_argument(
        "oracle comparison requires a scenario with exact dead reckoning");
  }
  const SynthesizedRun run = synthesize(sc, derive_seed(seed, kStreamSynth));
  return run_oracle_on(run, with_random_grid_phases(setup, seed),
                       derive_seed(seed, kStreamOracle));
}

CompareResult oracle_compare(const Scenario& sc, const FilterSetup& setup,
                             int n_seeds, std::uint64_t master_seed) {
  if (n_seeds < 1) throw std::invalid_argument("need >= 1 seed");
  if ((sc.dr_noise_diag.array() > 0.0).any()) {
    throw std::invalid_argument(
        "oracle comparison requires a scenario with exact dead reckoning");
  }

  struct PerSeed {
    double err_init = 0.0;
    double err_oracle = 0.0;
    std::uint64_t trig_init = 0;
    std::uint64_t trig_oracle = 0;
  };
  std::vector<PerSeed> per(static_cast<std::size_t>(n_seeds));

  parallel_for(std::size_t(n_seeds), [&](std::size_t s) {
    const std::uint64_t seed = derive_seed(master_seed, kStreamRealization, s);
    const SynthesizedRun run = synthesize(sc, derive_seed(seed, kStreamSynth));
    // Both filters see the same streams and the same grid phases.
    const FilterSetup phased = with_random_grid_phases(setup, seed);
    const RealizationResult ir =
        run_initializer_on(run, phased, derive_seed(seed, kStreamFilter));
    const OracleResult orc =
        run_oracle_on(run, phased, derive_seed(seed, kStreamOracle));
    per[s] = {ir.errors.back(), orc.errors.back(), ir.counters.trig,
              orc.counters.trig};
  });

  CompareResult out;
  out.n_seeds = n_seeds;
  out.n_particles = setup.base.particle_count();
  double sq_init = 0.0, sq_oracle = 0.0;
  for (const PerSeed& p : per) {
    sq_init += p.err_init * p.err_init;
    sq_oracle += p.err_oracle * p.err_oracle;
    out.trig_init += p.trig_init;
    out.trig_oracle += p.trig_oracle;
  }
  out.rmse_init = std::sqrt(sq_init / n_seeds);
  out.rmse_oracle = std::sqrt(sq_oracle / n_seeds);
  return out;
}

}  // namespace rbinit::sim
