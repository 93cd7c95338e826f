#pragma once

#include <cmath>
#include <numbers>

namespace rbinit {

/// Signed angular difference a - b wrapped to (-pi, pi].
///
/// Implements mod(a - b + pi, 2*pi) - pi with a nonnegative modulus, mapping
/// the single boundary case mod == 0 to +pi so the result lands in (-pi, pi].
template <typename Scalar>
Scalar wrap_diff(Scalar a, Scalar b) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar m = std::fmod(a - b + pi, two_pi);
  if (m < Scalar(0)) m += two_pi;
  if (m == Scalar(0)) return pi;
  return m - pi;
}

/// Wrap an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  return wrap_diff(theta, Scalar(0));
}

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

}  // namespace rbinit
