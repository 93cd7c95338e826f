#pragma once

#include <cmath>

#include "rbinit/angles.hpp"
#include "rbinit/types.hpp"

namespace rbinit {

/// Rotation from the agent frame to the navigation frame: planar rotation in
/// the (x, y) block, identity on z and theta.
template <typename Scalar>
Matrix4<Scalar> rotation(Scalar theta) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  Matrix4<Scalar> r;
  r << c, -s, Scalar(0), Scalar(0),
       s,  c, Scalar(0), Scalar(0),
       Scalar(0), Scalar(0), Scalar(1), Scalar(0),
       Scalar(0), Scalar(0), Scalar(0), Scalar(1);
  return r;
}

/// 3x4 rotate-and-project matrix: rotates the position part of a state by
/// theta and drops the heading component.
template <typename Scalar>
Matrix34<Scalar> range_projection(Scalar theta) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  Matrix34<Scalar> h;
  h << c, -s, Scalar(0), Scalar(0),
       s,  c, Scalar(0), Scalar(0),
       Scalar(0), Scalar(0), Scalar(1), Scalar(0);
  return h;
}

/// Express a state relative to the frame in which `origin` is the zero pose:
/// R^T(theta0) * (x - origin), heading re-wrapped.
template <typename DerivedX, typename DerivedO>
Vector4<typename DerivedX::Scalar> to_zero_frame(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedO>& origin) {
  using Scalar = typename DerivedX::Scalar;
  Vector4<Scalar> out =
      rotation(Scalar(origin[kTheta])).transpose() * (x - origin);
  out[kTheta] = wrap_angle(out[kTheta]);
  return out;
}

/// Inverse of to_zero_frame: R(theta0) * x0frame + origin, heading re-wrapped.
template <typename DerivedX, typename DerivedO>
Vector4<typename DerivedX::Scalar> from_zero_frame(
    const Eigen::MatrixBase<DerivedX>& x0frame,
    const Eigen::MatrixBase<DerivedO>& origin) {
  using Scalar = typename DerivedX::Scalar;
  Vector4<Scalar> out = rotation(Scalar(origin[kTheta])) * x0frame + origin;
  out[kTheta] = wrap_angle(out[kTheta]);
  return out;
}

/// Rotate a covariance between the two frames: R(theta0) * P * R^T(theta0).
/// Orthogonal similarity, so trace and eigenvalues are preserved.
template <typename Derived>
Matrix4<typename Derived::Scalar> transform_covariance(
    const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar theta0) {
  using Scalar = typename Derived::Scalar;
  const Matrix4<Scalar> r = rotation(theta0);
  Matrix4<Scalar> out = r * p * r.transpose();
  out = ((out + out.transpose()) / Scalar(2)).eval();
  return out;
}

/// Dead-reckoning system matrix: identity plus the heading-to-position
/// coupling column for a step of (dx, dy) taken at heading theta.
template <typename Scalar>
Matrix4<Scalar> system_matrix(Scalar theta, Scalar dx, Scalar dy) {
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  Matrix4<Scalar> f = Matrix4<Scalar>::Identity();
  f(kX, kTheta) = -s * dx - c * dy;
  f(kY, kTheta) = c * dx - s * dy;
  return f;
}

}  // namespace rbinit
