#include "rbinit/initializer.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rbinit/angles.hpp"
#include "rbinit/pose.hpp"

namespace rbinit {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fixed-shape reduction: per-block partial sums combined as a pairwise tree.
// The order never depends on how the particle loop is split across workers,
// so sums are bit-reproducible.
constexpr std::size_t kReduceBlock = 1024;

template <typename T>
T pairwise_tree(std::vector<T>& parts, const T& zero) {
  if (parts.empty()) return zero;
  std::size_t n = parts.size();
  while (n > 1) {
    std::size_t m = n / 2;
    for (std::size_t i = 0; i < m; ++i) parts[i] = parts[2 * i] + parts[2 * i + 1];
    if (n % 2) {
      parts[m] = parts[n - 1];
      ++m;
    }
    n = m;
  }
  return parts[0];
}

template <typename T, typename F>
T blocked_sum(std::size_t n, const T& zero, F&& contribution) {
  std::vector<T> parts;
  parts.reserve((n + kReduceBlock - 1) / kReduceBlock);
  for (std::size_t begin = 0; begin < n; begin += kReduceBlock) {
    const std::size_t end = std::min(n, begin + kReduceBlock);
    T acc = zero;
    for (std::size_t i = begin; i < end; ++i) acc = acc + contribution(i);
    parts.push_back(acc);
  }
  return pairwise_tree(parts, zero);
}

int tiling_count(double granularity, const char* what) {
  if (!(granularity > 0.0)) {
    throw std::invalid_argument(std::string(what) + " granularity must be > 0");
  }
  const int count = int(std::llround(kTwoPi / granularity));
  if (count < 1 || std::abs(count * granularity - kTwoPi) > 1e-9) {
    throw std::invalid_argument(std::string(what) +
                                " granularity does not divide the circle");
  }
  return count;
}

void check_weights(const std::vector<double>& w, std::size_t expected,
                   const char* what) {
  if (w.empty()) return;  // uniform
  if (w.size() != expected) {
    throw std::invalid_argument(std::string(what) + " weight count mismatch");
  }
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " weight < 0");
    total += v;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument(std::string(what) + " weights all zero");
  }
}

// Lower Cholesky factor with the jitter retry. An exactly zero matrix is a
// valid point proposal and factors to zero.
Matrix4<double> cholesky_lower(const Covariance4& p) {
  const double tr = p.trace();
  if (tr <= 0.0) return Matrix4<double>::Zero();
  Eigen::LLT<Matrix4<double>> llt(p);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Covariance4 jittered =
      p + 1e-12 * tr * Matrix4<double>::Identity();
  Eigen::LLT<Matrix4<double>> retry(jittered);
  if (retry.info() == Eigen::Success) return retry.matrixL();
  throw std::runtime_error("Cholesky factorization of P0 failed after jitter");
}

// Per-particle arithmetic of one ranging update, excluding the likelihood
// evaluation (reported by the model itself):
//   predicted range   7 mul  10 add  1 sqrt
//   reweight + renorm 2 mul   1 add            (the 1/sum division is shared)
//   mean sums         5 mul   5 add
//   deviation                 6 add  1 mod
//   covariance       14 mul  10 add
struct {
  int add, mul, div, sqrt, mod;
} constexpr kRangeCost{10, 7, 0, 1, 0};
constexpr struct {
  int add, mul;
} kReweightCost{1, 2};
constexpr struct {
  int add, mul;
} kMeanCost{5, 5};
constexpr struct {
  int add, mod;
} kDeviationCost{6, 1};
constexpr struct {
  int add, mul;
} kCovCost{10, 14};

// Per resampled particle: lower-triangular 4x4 times the draw (10 mul,
// 6 add), the alpha scaling (4 mul) and the mean shift (4 add).
constexpr struct {
  int add, mul;
} kResampleDrawCost{10, 14};

}  // namespace

Eigen::Vector4d default_gamma_cov() {
  const double heading_bound = deg_to_rad(10.0);
  return {1.0, 1.0, 1.0, heading_bound * heading_bound};
}

int BaseHypotheses::bearing_count() const {
  return tiling_count(bearing_granularity, "bearing");
}

int BaseHypotheses::heading_count() const {
  return tiling_count(heading_granularity, "heading");
}

std::size_t BaseHypotheses::particle_count() const {
  return heights.size() * range_offsets.size() * std::size_t(bearing_count()) *
         std::size_t(heading_count());
}

void BaseHypotheses::validate() const {
  if (heights.empty()) throw std::invalid_argument("no height hypotheses");
  if (range_offsets.empty()) throw std::invalid_argument("no range hypotheses");
  const int nb = bearing_count();
  const int nh = heading_count();
  (void)nb;
  check_weights(height_weights, heights.size(), "height");
  check_weights(heading_weights, std::size_t(nh), "heading");
  for (double h : heights) {
    if (!std::isfinite(h)) throw std::invalid_argument("non-finite height hypothesis");
  }
  for (double r : range_offsets) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite range offset");
  }
}

void InitializerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  if (!(gamma_cov.array() > 0.0).all()) {
    throw std::invalid_argument("gamma_cov entries must be > 0");
  }
}

InitializerState seed(const RangeMeasurement& first_range,
                      const DeadReckoningTrack& zero_track,
                      const BaseHypotheses& base,
                      const LikelihoodModel& likelihood,
                      const StateVector& initial_guess) {
  base.validate();
  if (!(first_range.value >= 0.0)) {
    throw std::invalid_argument("first range measurement must be >= 0");
  }
  if (!first_range.ref_position.allFinite()) {
    throw std::invalid_argument("non-finite reference position");
  }

  const int nb = base.bearing_count();
  const int nh = base.heading_count();

  InitializerState state;
  state.zero_track = zero_track;
  state.initial_guess = initial_guess;

  // The bearing and heading grids are static, so their cos/sin are evaluated
  // once per table entry and copied onto particles.
  std::vector<double> cos_bearing(nb), sin_bearing(nb);
  for (int n = 0; n < nb; ++n) {
    const double chi = base.bearing_phase + n * base.bearing_granularity;
    cos_bearing[n] = std::cos(chi);
    sin_bearing[n] = std::sin(chi);
  }
  std::vector<double> theta_grid(nh), cos_heading(nh), sin_heading(nh);
  for (int m = 0; m < nh; ++m) {
    const double theta = wrap_angle(base.heading_phase + m * base.heading_granularity);
    theta_grid[m] = theta;
    cos_heading[m] = std::cos(theta);
    sin_heading[m] = std::sin(theta);
  }
  state.counters.trig += 2 * std::uint64_t(nb + nh);

  // True-range hypotheses and their likelihood weights.
  std::vector<double> ranges(base.range_offsets.size());
  std::vector<double> range_weights(base.range_offsets.size());
  for (std::size_t j = 0; j < base.range_offsets.size(); ++j) {
    ranges[j] = std::max(first_range.value + base.range_offsets[j], 0.0);
    range_weights[j] = likelihood.evaluate(ranges[j], first_range.value);
  }

  const Eigen::Vector3d& ref = first_range.ref_position;
  const double zx = zero_track.mean[kX];
  const double zy = zero_track.mean[kY];
  const double zz = zero_track.mean[kZ];

  state.particles.reserve(base.particle_count());
  for (std::size_t ih = 0; ih < base.heights.size(); ++ih) {
    const double h = base.heights[ih];
    const double wh = base.height_weights.empty() ? 1.0 : base.height_weights[ih];
    // Height of the ranging counterpart above the hypothesized current
    // height of the agent (initial height h plus accumulated climb).
    const double dz = ref[kZ] - zz - h;
    for (std::size_t jr = 0; jr < ranges.size(); ++jr) {
      const double r = ranges[jr];
      const double wr = range_weights[jr];
      // Horizontal projection of the range hypothesis; the absolute value
      // keeps small ranges from going imaginary.
      const double rbar = std::sqrt(std::abs(r * r - dz * dz));
      for (int n = 0; n < nb; ++n) {
        const double offx = rbar * cos_bearing[n];
        const double offy = rbar * sin_bearing[n];
        for (int m = 0; m < nh; ++m) {
          Particle p;
          p.theta0 = theta_grid[m];
          p.cos_theta0 = cos_heading[m];
          p.sin_theta0 = sin_heading[m];
          // x0 = ref - [rbar cos, rbar sin, dz] - H(theta) * zero-frame pose
          p.p0[kX] = ref[kX] - offx - (p.cos_theta0 * zx - p.sin_theta0 * zy);
          p.p0[kY] = ref[kY] - offy - (p.sin_theta0 * zx + p.cos_theta0 * zy);
          p.p0[kZ] = ref[kZ] - dz - zz;
          const double wt = base.heading_weights.empty() ? 1.0 : base.heading_weights[m];
          p.weight = wh * wr * wt;
          state.particles.push_back(p);
        }
      }
    }
  }

  const std::size_t n = state.particles.size();
  const double total = blocked_sum(n, 0.0, [&](std::size_t i) {
    return state.particles[i].weight;
  });
  if (!(total > 0.0)) {
    throw std::invalid_argument("seed hypothesis weights sum to zero");
  }
  const double inv = 1.0 / total;
  for (Particle& p : state.particles) p.weight *= inv;

  auto [x0, p0] = conditional_moments(state.particles, &state.counters,
                                      &state.degenerate_heading);
  state.x0_hat = x0;
  state.p0_hat = p0;
  state.ell = 0;
  return state;
}

UpdateOutcome ranging_update(InitializerState& state,
                             const RangeMeasurement& meas,
                             const LikelihoodModel& likelihood) {
  if (state.terminated) {
    throw std::logic_error("ranging_update called on terminated initializer");
  }
  if (!(meas.value >= 0.0)) {
    throw std::invalid_argument("range measurement must be >= 0");
  }
  if (!meas.ref_position.allFinite()) {
    throw std::invalid_argument("non-finite reference position");
  }

  const std::size_t n = state.particles.size();
  const StateVector zero_state = state.zero_track.mean;

  std::vector<double> candidate(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Particle& p = state.particles[i];
    const double r_hat = predicted_range(p, zero_state, meas.ref_position);
    candidate[i] = p.weight * likelihood.evaluate(meas.value, r_hat);
  }
  const double total =
      blocked_sum(n, 0.0, [&](std::size_t i) { return candidate[i]; });

  const LikelihoodOpCost lik = likelihood.per_eval_cost();
  state.counters.add +=
      n * std::uint64_t(kRangeCost.add + lik.add + kReweightCost.add);
  state.counters.mul +=
      n * std::uint64_t(kRangeCost.mul + lik.mul + kReweightCost.mul);
  state.counters.div += n * std::uint64_t(lik.div);
  state.counters.sqrt += n * std::uint64_t(kRangeCost.sqrt);

  if (!(total >= 1e-300)) {
    // Degenerate measurement: keep the prior weights and moments.
    return UpdateOutcome::kDiscardedUnderflow;
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < n; ++i) state.particles[i].weight = candidate[i] * inv;

  auto [x0, p0] = conditional_moments(state.particles, &state.counters,
                                      &state.degenerate_heading);
  state.x0_hat = x0;
  state.p0_hat = p0;
  return UpdateOutcome::kApplied;
}

std::pair<StateVector, Covariance4> conditional_moments(
    std::span<const Particle> particles, OpCounters* counters,
    bool* degenerate_heading) {
  const std::size_t n = particles.size();
  if (n == 0) throw std::invalid_argument("conditional_moments on empty set");

  using Acc5 = Eigen::Matrix<double, 5, 1>;
  const Acc5 first = blocked_sum(n, Acc5(Acc5::Zero()), [&](std::size_t i) {
    const Particle& p = particles[i];
    Acc5 a;
    a << p.weight * p.p0[kX], p.weight * p.p0[kY], p.weight * p.p0[kZ],
        p.weight * p.sin_theta0, p.weight * p.cos_theta0;
    return a;
  });

  StateVector mean;
  mean.head<3>() = first.head<3>();
  const double sin_sum = first[3];
  const double cos_sum = first[4];
  const bool degenerate = std::hypot(sin_sum, cos_sum) < 1e-9;
  mean[kTheta] = degenerate ? 0.0 : std::atan2(sin_sum, cos_sum);
  if (degenerate_heading) *degenerate_heading = *degenerate_heading || degenerate;

  // Upper triangle of sum w * e e^T, e = (p_hat - p, wrapped heading dev).
  using Acc10 = Eigen::Matrix<double, 10, 1>;
  const Acc10 second = blocked_sum(n, Acc10(Acc10::Zero()), [&](std::size_t i) {
    const Particle& p = particles[i];
    Eigen::Vector4d e;
    e[kX] = mean[kX] - p.p0[kX];
    e[kY] = mean[kY] - p.p0[kY];
    e[kZ] = mean[kZ] - p.p0[kZ];
    e[kTheta] = wrap_diff(mean[kTheta], p.theta0);
    const Eigen::Vector4d we = p.weight * e;
    Acc10 a;
    a << we[0] * e[0], we[0] * e[1], we[0] * e[2], we[0] * e[3],
        we[1] * e[1], we[1] * e[2], we[1] * e[3],
        we[2] * e[2], we[2] * e[3],
        we[3] * e[3];
    return a;
  });

  Covariance4 cov;
  cov(0, 0) = second[0];
  cov(0, 1) = cov(1, 0) = second[1];
  cov(0, 2) = cov(2, 0) = second[2];
  cov(0, 3) = cov(3, 0) = second[3];
  cov(1, 1) = second[4];
  cov(1, 2) = cov(2, 1) = second[5];
  cov(1, 3) = cov(3, 1) = second[6];
  cov(2, 2) = second[7];
  cov(2, 3) = cov(3, 2) = second[8];
  cov(3, 3) = second[9];

  if (counters) {
    counters->add += n * std::uint64_t(kMeanCost.add + kDeviationCost.add + kCovCost.add);
    counters->mul += n * std::uint64_t(kMeanCost.mul + kCovCost.mul);
    counters->mod += n * std::uint64_t(kDeviationCost.mod);
  }
  return {mean, cov};
}

std::pair<StateVector, Covariance4> current_estimate(const InitializerState& state) {
  StateVector x = from_zero_frame(state.zero_track.mean, state.x0_hat);
  const Matrix4<double> f =
      system_matrix(state.x0_hat[kTheta], state.zero_track.mean[kX],
                    state.zero_track.mean[kY]);
  Covariance4 p = f * state.zero_track.cov * f.transpose() + state.p0_hat;
  p = ((p + p.transpose()) / 2.0).eval();
  return {x, p};
}

int resample(InitializerState& state, GaussianSource& gauss,
             const InitializerConfig& config) {
  config.validate();
  const std::size_t n = state.particles.size();
  if (n == 0) return 0;
  const double threshold = config.gamma / double(n);

  std::vector<std::size_t> doomed;
  for (std::size_t i = 0; i < n; ++i) {
    if (state.particles[i].weight < threshold) doomed.push_back(i);
  }
  if (doomed.empty()) return 0;

  const Matrix4<double> chol = cholesky_lower(state.p0_hat);
  const double new_weight = 1.0 / double(n);
  for (std::size_t i : doomed) {
    Eigen::Vector4d draw;
    for (int k = 0; k < 4; ++k) draw[k] = gauss.draw();
    const Eigen::Vector4d step = chol.triangularView<Eigen::Lower>() * draw;
    const Eigen::Vector4d x = state.x0_hat + config.alpha * step;
    Particle& p = state.particles[i];
    p.p0 = x.head<3>();
    p.theta0 = wrap_angle(x[kTheta]);
    p.cos_theta0 = std::cos(p.theta0);
    p.sin_theta0 = std::sin(p.theta0);
    p.weight = new_weight;
  }
  state.counters.trig += 2 * std::uint64_t(doomed.size());
  state.counters.add += doomed.size() * std::uint64_t(kResampleDrawCost.add);
  state.counters.mul += doomed.size() * std::uint64_t(kResampleDrawCost.mul);

  const double total = blocked_sum(n, 0.0, [&](std::size_t i) {
    return state.particles[i].weight;
  });
  const double inv = 1.0 / total;
  for (Particle& p : state.particles) p.weight *= inv;
  state.counters.add += n;
  state.counters.mul += n;
  return int(doomed.size());
}

bool check_termination(const Covariance4& p0_hat, const Eigen::Vector4d& gamma_cov) {
  return (p0_hat.diagonal().array() < gamma_cov.array()).all();
}

void apply_increment(InitializerState& state, const DeadReckoningIncrement& u) {
  state.zero_track = propagate(state.zero_track, u);
}

UpdateOutcome process_measurement(InitializerState& state,
                                  const RangeMeasurement& meas,
                                  const LikelihoodModel& likelihood,
                                  const InitializerConfig& config,
                                  GaussianSource& gauss, Snapshot* snapshot) {
  if (state.terminated) {
    throw std::logic_error("process_measurement called on terminated initializer");
  }
  config.validate();
  const UpdateOutcome outcome = ranging_update(state, meas, likelihood);
  state.ell += 1;
  resample(state, gauss, config);
  state.terminated = check_termination(state.p0_hat, config.gamma_cov);
  if (snapshot) *snapshot = make_snapshot(state);
  return outcome;
}

Snapshot make_snapshot(const InitializerState& state) {
  Snapshot snap;
  snap.ell = state.ell;
  snap.x0_hat = state.x0_hat;
  snap.p0 = state.p0_hat;
  snap.p0_diag = state.p0_hat.diagonal();
  snap.x_hat = current_estimate(state).first;
  const double line = 1.0 / double(state.particles.size());
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    const Particle& p = state.particles[i];
    if (p.weight > line) {
      snap.particles.push_back({i, p.p0, p.theta0, p.weight});
    }
  }
  return snap;
}

}  // namespace rbinit
