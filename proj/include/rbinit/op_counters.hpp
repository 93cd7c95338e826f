#pragma once

#include <cstdint>

namespace rbinit {

/// Arithmetic counters for the per-particle work of the filter.
///
/// Counts cover operations whose number scales with the particle count;
/// constant per-update work (frame transforms, the single atan2 of the
/// heading vector sum, the one Cholesky factorization per resampling pass)
/// is deliberately excluded from the budget, matching how the per-particle
/// cost is accounted.
///
/// `trig` counts cos/sin/atan2 evaluations attributable to particles. The
/// filter only performs those when seeding the hypothesis tables and when a
/// particle is resampled.
struct OpCounters {
  std::uint64_t add = 0;
  std::uint64_t mul = 0;
  std::uint64_t div = 0;
  std::uint64_t sqrt = 0;
  std::uint64_t mod = 0;
  std::uint64_t trig = 0;

  OpCounters operator-(const OpCounters& o) const {
    return {add - o.add, mul - o.mul, div - o.div,
            sqrt - o.sqrt, mod - o.mod, trig - o.trig};
  }
  OpCounters& operator+=(const OpCounters& o) {
    add += o.add;
    mul += o.mul;
    div += o.div;
    sqrt += o.sqrt;
    mod += o.mod;
    trig += o.trig;
    return *this;
  }
};

}  // namespace rbinit
