#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbinit/sim/harness.hpp"

namespace rbinit::io {

/// Effective configuration of a CLI run. Angles are degrees in files and
/// flags (including deg^2 for the heading variance bound) and converted to
/// radians at this boundary only.
struct RunConfig {
  std::string scenario_path;  // empty -> built-in default scenario
  double gamma = 0.1;
  double alpha = 1.2;
  // [m^2, m^2, m^2, deg^2]
  std::vector<double> gamma_cov{1.0, 1.0, 1.0, 100.0};
  double sigma = 1.0;  // likelihood scale, m
  std::vector<double> heights{-0.5, 0.0, 0.5};
  std::vector<double> height_weights;  // empty -> uniform
  std::vector<double> range_offsets{-1.0, 0.0, 1.0};
  double bearing_granularity_deg = 11.25;
  double heading_granularity_deg = 11.25;
  std::vector<double> heading_weights;  // empty -> uniform
  std::vector<double> sweep_granularities_deg{5.625, 11.25, 22.5, 45.0, 90.0};
  std::uint64_t seed = 1;
  int realizations = 100;
  std::string out_dir = "out";
  std::vector<double> initial_guess{0.0, 0.0, 0.0, 0.0};  // x, y, z, theta_deg

  /// Merge keys from a JSON config file; unknown keys are rejected.
  void load_file(const std::string& path);
  void save_file(const std::string& path) const;

  void validate() const;  // throws std::invalid_argument

  /// Radians-world scenario and filter setup.
  sim::Scenario scenario() const;
  sim::FilterSetup filter_setup() const;
};

}  // namespace rbinit::io
