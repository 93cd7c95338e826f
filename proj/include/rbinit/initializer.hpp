#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rbinit/dead_reckoning.hpp"
#include "rbinit/likelihood.hpp"
#include "rbinit/op_counters.hpp"
#include "rbinit/random.hpp"
#include "rbinit/types.hpp"

namespace rbinit {

/// One hypothesis of the initial state [p0, theta0]. The cos/sin of the
/// heading are cached when the particle is created or resampled; ranging
/// updates only ever read the cache.
struct Particle {
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  double theta0 = 0.0;
  double cos_theta0 = 1.0;
  double sin_theta0 = 0.0;
  double weight = 0.0;
};

/// Deterministic grids over height, true range, bearing and heading. Their
/// Cartesian product seeds the particle set at the first ranging.
struct BaseHypotheses {
  std::vector<double> heights;          // m
  std::vector<double> height_weights;   // empty -> uniform
  std::vector<double> range_offsets;    // m, added to the first measured range
  double bearing_granularity = 0.0;     // rad; must divide 2*pi
  double heading_granularity = 0.0;     // rad; must divide 2*pi
  std::vector<double> heading_weights;  // empty -> uniform
  /// Phase offsets of the bearing/heading grids. Randomizing them across
  /// Monte-Carlo realizations is what "random seedings" means: the grids
  /// still tile the circle, just not anchored at zero.
  double bearing_phase = 0.0;  // rad
  double heading_phase = 0.0;  // rad

  int bearing_count() const;
  int heading_count() const;
  std::size_t particle_count() const;

  /// Throws std::invalid_argument on empty categories, granularities that do
  /// not tile the circle, negative weights, or all-zero weight categories.
  void validate() const;
};

/// A range measurement together with the known position of the counterpart
/// (initialized agent or anchor node; the filter does not distinguish them).
struct RangeMeasurement {
  double value = 0.0;  // m, >= 0
  Eigen::Vector3d ref_position = Eigen::Vector3d::Zero();
};

/// Termination bounds used when none are configured: 1 m^2 per position
/// axis and (10 deg)^2 for the heading.
Eigen::Vector4d default_gamma_cov();

struct InitializerConfig {
  /// A particle whose weight falls below gamma/N is resampled.
  double gamma = 0.1;
  /// Proposal inflation ("forgetting factor"); alpha > 1 discounts earlier
  /// conditioning to tolerate dead-reckoning error.
  double alpha = 1.2;
  /// Termination bounds on diag(P0): [m^2, m^2, m^2, rad^2].
  Eigen::Vector4d gamma_cov = default_gamma_cov();

  void validate() const;
};

enum class UpdateOutcome {
  kApplied,
  /// Total candidate weight underflowed; the measurement was discarded and
  /// the prior weights kept.
  kDiscardedUnderflow,
};

/// Particle entry of a snapshot (only particles with weight > 1/N are kept).
struct SnapshotParticle {
  std::size_t index = 0;
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  double theta0 = 0.0;
  double weight = 0.0;
};

/// Exported record of one ranging event: conditional moments, the current
/// state estimate, and the significant particles.
struct Snapshot {
  int ell = 0;
  StateVector x0_hat = StateVector::Zero();
  Eigen::Vector4d p0_diag = Eigen::Vector4d::Zero();
  Covariance4 p0 = Covariance4::Zero();
  StateVector x_hat = StateVector::Zero();
  std::vector<SnapshotParticle> particles;
};

/// Full recursion state of the initialization filter for one agent.
struct InitializerState {
  std::vector<Particle> particles;
  /// Dead reckoning accumulated since the agent joined, in the frame where
  /// its (unknown) initial state is the origin with zero heading.
  DeadReckoningTrack zero_track;
  /// Conditional moments of the initial state given rangings 0..ell.
  StateVector x0_hat = StateVector::Zero();
  Covariance4 p0_hat = Covariance4::Zero();
  bool terminated = false;
  /// Set when the heading vector sum had (near) zero length and the mean
  /// heading was resolved to 0.
  bool degenerate_heading = false;
  int ell = 0;
  StateVector initial_guess = StateVector::Zero();
  OpCounters counters;

  std::size_t n() const { return particles.size(); }
};

/// Build the initial particle set from the first range measurement and the
/// base hypotheses. `zero_track` must reflect all dead reckoning since the
/// agent joined. The initial guess does not enter the hypothesis geometry;
/// it is kept as the agent's pre-ranging anchor.
InitializerState seed(const RangeMeasurement& first_range,
                      const DeadReckoningTrack& zero_track,
                      const BaseHypotheses& base,
                      const LikelihoodModel& likelihood,
                      const StateVector& initial_guess = StateVector::Zero());

/// Predicted range of one hypothesis given the zero-frame pose of the agent.
/// Uses only the particle's cached cos/sin.
inline double predicted_range(const Particle& particle,
                              const StateVector& zero_state,
                              const Eigen::Vector3d& ref_position) {
  const double c = particle.cos_theta0;
  const double s = particle.sin_theta0;
  const double rx = c * zero_state[kX] - s * zero_state[kY] + particle.p0[kX] - ref_position[kX];
  const double ry = s * zero_state[kX] + c * zero_state[kY] + particle.p0[kY] - ref_position[kY];
  const double rz = zero_state[kZ] + particle.p0[kZ] - ref_position[kZ];
  return std::sqrt(rx * rx + ry * ry + rz * rz);
}

/// Reweight every particle by the likelihood of the measurement, renormalize,
/// and recompute the conditional moments. No trigonometry is evaluated.
UpdateOutcome ranging_update(InitializerState& state,
                             const RangeMeasurement& meas,
                             const LikelihoodModel& likelihood);

/// Weighted mean (vector-sum heading) and wrapped-deviation covariance of a
/// particle set with normalized weights.
std::pair<StateVector, Covariance4> conditional_moments(
    std::span<const Particle> particles, OpCounters* counters = nullptr,
    bool* degenerate_heading = nullptr);

/// Current pose and covariance in the navigation frame: the zero-frame track
/// re-anchored at the latest initial-state estimate, with the whole
/// accumulated dead reckoning treated as one step for the covariance.
std::pair<StateVector, Covariance4> current_estimate(const InitializerState& state);

/// Replace every particle with weight < gamma/N by a draw from
/// N(x0_hat, alpha^2 P0_hat), assign it weight 1/N, refresh its cos/sin
/// cache, and renormalize. Returns the number of replaced particles.
int resample(InitializerState& state, GaussianSource& gauss,
             const InitializerConfig& config);

/// True iff every diagonal entry of p0_hat is strictly below its bound.
bool check_termination(const Covariance4& p0_hat, const Eigen::Vector4d& gamma_cov);

/// Apply one dead-reckoning increment to the zero-frame track.
void apply_increment(InitializerState& state, const DeadReckoningIncrement& u);

/// One full ranging event: update -> moments -> current estimate -> resample
/// -> termination check. Throws std::logic_error if already terminated.
UpdateOutcome process_measurement(InitializerState& state,
                                  const RangeMeasurement& meas,
                                  const LikelihoodModel& likelihood,
                                  const InitializerConfig& config,
                                  GaussianSource& gauss,
                                  Snapshot* snapshot = nullptr);

/// Snapshot of the current state (used for the seed event and by
/// process_measurement).
Snapshot make_snapshot(const InitializerState& state);

}  // namespace rbinit
