#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rbinit {

/// Arithmetic cost of one likelihood evaluation, used by the filter's
/// per-particle operation accounting.
struct LikelihoodOpCost {
  int add = 0;
  int mul = 0;
  int div = 0;
};

/// Range-measurement likelihood. Any evaluable density works; the filter
/// only ever asks for the value at (observed, predicted).
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;
  virtual double evaluate(double observed, double predicted) const = 0;
  virtual LikelihoodOpCost per_eval_cost() const = 0;
};

/// Heavy-tailed Cauchy likelihood (sigma/pi) / ((observed-predicted)^2 +
/// sigma^2). The tail makes the reweighting robust to range outliers and the
/// evaluation is cheap.
class CauchyLikelihood final : public LikelihoodModel {
 public:
  explicit CauchyLikelihood(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("Cauchy scale must be > 0");
    scale_over_pi_ = sigma / std::numbers::pi;
    sigma_sq_ = sigma * sigma;
  }

  double evaluate(double observed, double predicted) const override {
    const double d = observed - predicted;
    return scale_over_pi_ / (d * d + sigma_sq_);
  }

  // d = o - p, d*d, + sigma^2, one division.
  LikelihoodOpCost per_eval_cost() const override { return {2, 1, 1}; }

  double sigma() const { return sigma_; }

 private:
  double sigma_;
  double scale_over_pi_;
  double sigma_sq_;
};

}  // namespace rbinit
