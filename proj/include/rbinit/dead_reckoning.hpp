#pragma once

#include "rbinit/pose.hpp"
#include "rbinit/types.hpp"

namespace rbinit {

/// One dead-reckoning step: agent-frame displacement and heading change with
/// its error covariance.
struct DeadReckoningIncrement {
  double dx = 0.0;  // m, agent frame
  double dy = 0.0;  // m
  double dz = 0.0;  // m
  double dtheta = 0.0;  // rad
  Covariance4 q = Covariance4::Zero();

  StateVector as_vector() const { return StateVector(dx, dy, dz, dtheta); }
};

/// Mean and covariance propagated from dead-reckoning increments. One
/// instance tracks the navigation frame, a second one (started at the zero
/// state with zero covariance) tracks the zero frame.
struct DeadReckoningTrack {
  StateVector mean = StateVector::Zero();
  Covariance4 cov = Covariance4::Zero();
  long step_count = 0;
};

/// One propagation step: mean through the motion model with zero noise,
/// covariance through F P F^T + R Q R^T, symmetrized.
inline DeadReckoningTrack propagate(const DeadReckoningTrack& track,
                                    const DeadReckoningIncrement& u) {
  const double theta = track.mean[kTheta];
  const Matrix4<double> r = rotation(theta);
  const Matrix4<double> f = system_matrix(theta, u.dx, u.dy);

  DeadReckoningTrack out;
  out.mean = track.mean + r * u.as_vector();
  out.mean[kTheta] = wrap_angle(out.mean[kTheta]);
  out.cov = f * track.cov * f.transpose() + r * u.q * r.transpose();
  out.cov = ((out.cov + out.cov.transpose()) / 2.0).eval();
  out.step_count = track.step_count + 1;
  return out;
}

}  // namespace rbinit
