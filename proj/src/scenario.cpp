#include "rbinit/sim/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "rbinit/angles.hpp"
#include "rbinit/pose.hpp"
#include "rbinit/random.hpp"

namespace rbinit::sim {
namespace {

Eigen::Vector3d wp(double x, double y) { return {x, y, 0.0}; }

// Dense path through the waypoints in legs of at most step_length, keeping
// every waypoint on the path. Returns the dense index of each waypoint.
struct DensePath {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::size_t> waypoint_index;
};

DensePath densify(const std::vector<Eigen::Vector3d>& waypoints, double step_length) {
  DensePath out;
  out.points.push_back(waypoints.front());
  out.waypoint_index.push_back(0);
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const Eigen::Vector3d& a = waypoints[w - 1];
    const Eigen::Vector3d& b = waypoints[w];
    const double len = (b - a).norm();
    if (len < 1e-12) {
      out.waypoint_index.push_back(out.points.size() - 1);
      continue;
    }
    const int steps = std::max(1, int(std::ceil(len / step_length)));
    for (int i = 1; i <= steps; ++i) {
      out.points.push_back(a + (b - a) * (double(i) / steps));
    }
    out.waypoint_index.push_back(out.points.size() - 1);
  }
  return out;
}

// Heading while walking leg k -> k+1; carried through legs with no
// horizontal displacement and past the final point.
std::vector<double> leg_headings(const std::vector<Eigen::Vector3d>& pts) {
  std::vector<double> heading(pts.size(), 0.0);
  double current = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double dx = pts[k + 1][0] - pts[k][0];
    const double dy = pts[k + 1][1] - pts[k][1];
    if (std::hypot(dx, dy) > 1e-12) current = std::atan2(dy, dx);
    heading[k] = current;
  }
  if (pts.size() >= 2) heading[pts.size() - 1] = heading[pts.size() - 2];
  return heading;
}

}  // namespace

void Scenario::validate() const {
  if (ref_waypoints.empty() || agent_waypoints.empty()) {
    throw std::invalid_argument("scenario waypoint lists must be non-empty");
  }
  if (ranging_schedule.empty()) {
    throw std::invalid_argument("scenario has no ranging events");
  }
  if (!(step_length > 0.0)) throw std::invalid_argument("step_length must be > 0");
  if (!(range_noise_scale >= 0.0)) {
    throw std::invalid_argument("range noise scale must be >= 0");
  }
  if (!(dr_noise_diag.array() >= 0.0).all()) {
    throw std::invalid_argument("dr_noise_diag entries must be >= 0");
  }
  int prev_agent = -1;
  for (const auto& [ref_i, agent_i] : ranging_schedule) {
    if (ref_i < 0 || std::size_t(ref_i) >= ref_waypoints.size() || agent_i < 0 ||
        std::size_t(agent_i) >= agent_waypoints.size()) {
      throw std::invalid_argument("ranging_schedule index out of bounds");
    }
    if (agent_i < prev_agent) {
      throw std::invalid_argument("ranging_schedule not ordered along the agent path");
    }
    prev_agent = agent_i;
  }
}

Scenario build_default_scenario() {
  Scenario sc;
  // Digitized from the reference two-agent geometry: the lower agent walks
  // roughly 150 m and ranges eight times to the upper agent.
  sc.ref_waypoints = {
      wp(0, 15),   wp(6, 30),   wp(12, 32),  wp(18, 33),  // ranging 0
      wp(23, 38),  wp(38, 37),                            // ranging 1
      wp(42, 40),  wp(50, 44),  wp(55, 46),               // ranging 2
      wp(59, 48),  wp(67, 47),  wp(70, 43),               // ranging 3
      wp(75, 40),  wp(83, 36),  wp(89, 34),               // ranging 4
      wp(91, 33),  wp(100, 32), wp(105, 28),              // ranging 5
      wp(108, 24), wp(116, 22), wp(134, 23),              // ranging 6
      wp(141, 26), wp(146, 30), wp(150, 33),              // ranging 7
  };
  sc.agent_waypoints = {
      wp(16, 13),  wp(29, 12),  wp(35, 13),  wp(41, 16),  // ranging 0
      wp(47, 19),  wp(62, 21),                            // ranging 1
      wp(64, 20),  wp(79, 14),  wp(80, 13),               // ranging 2
      wp(87, 8),   wp(95, 9),   wp(96, 10),               // ranging 3
      wp(105, 9),  wp(111, 15), wp(114, 16),              // ranging 4
      wp(123, 23), wp(127, 35), wp(129, 37),              // ranging 5
      wp(131, 40), wp(135, 45), wp(137, 46),              // ranging 6
      wp(141, 50), wp(146, 52), wp(150, 53),              // ranging 7
  };
  sc.ranging_schedule = {{3, 3},   {5, 5},   {8, 8},   {11, 11},
                         {14, 14}, {17, 17}, {20, 20}, {23, 23}};
  sc.step_length = 1.0;
  sc.range_noise_scale = 1.0;
  sc.dr_noise_diag.setZero();
  return sc;
}

Scenario make_static_agent_variant(const Scenario& sc) {
  Scenario out = sc;
  for (auto& p : out.agent_waypoints) p = sc.agent_waypoints.front();
  return out;
}

SynthesizedRun synthesize(const Scenario& sc, std::uint64_t noise_seed) {
  sc.validate();
  Rng rng(noise_seed);

  const DensePath path = densify(sc.agent_waypoints, sc.step_length);
  const std::vector<double> heading = leg_headings(path.points);

  SynthesizedRun run;
  run.truth.reserve(path.points.size());
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    StateVector x;
    x.head<3>() = path.points[k];
    x[kTheta] = wrap_angle(heading[k]);
    run.truth.push_back(x);
  }

  const bool noisy_dr = (sc.dr_noise_diag.array() > 0.0).any();
  Covariance4 q = Covariance4::Zero();
  q.diagonal() = sc.dr_noise_diag;

  run.increments.reserve(run.truth.size() - 1);
  for (std::size_t k = 1; k < run.truth.size(); ++k) {
    const StateVector& prev = run.truth[k - 1];
    const StateVector& next = run.truth[k];
    // Invert the motion model: the agent-frame displacement that maps the
    // previous true pose onto the next one.
    const Eigen::Vector3d dp_nav = next.head<3>() - prev.head<3>();
    const Eigen::Vector3d dp_agent =
        rotation(prev[kTheta]).topLeftCorner<3, 3>().transpose() * dp_nav;
    DeadReckoningEvent ev;
    ev.t = double(k);
    ev.u.dx = dp_agent[0];
    ev.u.dy = dp_agent[1];
    ev.u.dz = dp_agent[2];
    ev.u.dtheta = wrap_diff(next[kTheta], prev[kTheta]);
    ev.u.q = q;
    if (noisy_dr) {
      ev.u.dx += std::sqrt(sc.dr_noise_diag[0]) * rng.normal();
      ev.u.dy += std::sqrt(sc.dr_noise_diag[1]) * rng.normal();
      ev.u.dz += std::sqrt(sc.dr_noise_diag[2]) * rng.normal();
      ev.u.dtheta += std::sqrt(sc.dr_noise_diag[3]) * rng.normal();
    }
    run.increments.push_back(ev);
  }

  for (const auto& [ref_i, agent_i] : sc.ranging_schedule) {
    SynthRangeEvent ev;
    ev.after_step = path.waypoint_index[std::size_t(agent_i)];
    ev.t = double(ev.after_step);
    const Eigen::Vector3d ref_pos = sc.ref_waypoints[std::size_t(ref_i)];
    const double true_range =
        (run.truth[ev.after_step].head<3>() - ref_pos).norm();
    // Heavy tail kept as-is; only physically impossible negatives floor at 0.
    ev.meas.value = std::max(0.0, true_range + rng.cauchy(sc.range_noise_scale));
    ev.meas.ref_position = ref_pos;
    run.measurements.push_back(ev);
    run.truth_at_ranging.push_back(run.truth[ev.after_step]);
  }
  return run;
}

}  // namespace rbinit::sim
