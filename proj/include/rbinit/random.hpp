#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace rbinit {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic stream id for (master seed, purpose, index) triples so that
/// independent consumers (measurement noise, filter resampling, oracle) never
/// share a stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(purpose)) + index);
}

/// Seeded random source. All draws go through explicit transforms of the
/// mt19937_64 output so streams are reproducible bit-for-bit for a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Cauchy with location 0 by inverse CDF: scale * tan(pi * (u - 1/2)).
  double cauchy(double scale) {
    return scale * std::tan(std::numbers::pi * (uniform() - 0.5));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Source of standard Gaussian draws injected into the resampling step.
class GaussianSource {
 public:
  virtual ~GaussianSource() = default;
  virtual double draw() = 0;
};

class RngGaussianSource final : public GaussianSource {
 public:
  explicit RngGaussianSource(Rng& rng) : rng_(rng) {}
  double draw() override { return rng_.normal(); }

 private:
  Rng& rng_;
};

/// Cycles through a pre-generated list of standard Gaussian samples, for
/// setups where draws must not cost anything at run time.
class TableGaussianSource final : public GaussianSource {
 public:
  explicit TableGaussianSource(std::vector<double> table)
      : table_(std::move(table)) {
    if (table_.empty()) throw std::invalid_argument("empty Gaussian table");
  }
  double draw() override {
    const double v = table_[next_];
    next_ = (next_ + 1) % table_.size();
    return v;
  }

 private:
  std::vector<double> table_;
  std::size_t next_ = 0;
};

}  // namespace rbinit
