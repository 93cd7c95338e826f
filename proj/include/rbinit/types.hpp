#pragma once

#include <Eigen/Dense>

namespace rbinit {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Matrix34 = Eigen::Matrix<Scalar, 3, 4>;

/// Agent state [x, y, z, theta]: position in meters, planar heading in
/// radians. Heading is kept wrapped to (-pi, pi] by every operation that
/// produces a state.
using StateVector = Vector4<double>;

/// 4x4 state covariance. Blocks carry m^2 / m*rad / rad^2 units.
/// Kept symmetric by symmetrization after every update.
using Covariance4 = Matrix4<double>;

// State component indices.
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kZ = 2;
inline constexpr int kTheta = 3;

}  // namespace rbinit
