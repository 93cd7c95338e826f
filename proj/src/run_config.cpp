#include "rbinit/io/run_config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rbinit/angles.hpp"
#include "rbinit/io/scenario_io.hpp"

namespace rbinit::io {
namespace {

using nlohmann::json;

void get_if(const json& doc, const char* key, double& out) {
  if (doc.contains(key)) out = doc.at(key).get<double>();
}
void get_if(const json& doc, const char* key, int& out) {
  if (doc.contains(key)) out = doc.at(key).get<int>();
}
void get_if(const json& doc, const char* key, std::uint64_t& out) {
  if (doc.contains(key)) out = doc.at(key).get<std::uint64_t>();
}
void get_if(const json& doc, const char* key, std::string& out) {
  if (doc.contains(key)) out = doc.at(key).get<std::string>();
}
void get_if(const json& doc, const char* key, std::vector<double>& out) {
  if (doc.contains(key)) out = doc.at(key).get<std::vector<double>>();
}

const char* const kKnownKeys[] = {
    "scenario",       "gamma",
    "alpha",          "gamma_cov",
    "sigma",          "heights",
    "height_weights", "range_offsets",
    "bearing_granularity_deg", "heading_granularity_deg",
    "heading_weights", "sweep_granularities_deg",
    "seed",           "realizations",
    "out_dir",        "initial_guess",
};

}  // namespace

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("config file " + path + " must hold a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool known = false;
    for (const char* k : kKnownKeys) known = known || (key == k);
    if (!known) {
      throw std::invalid_argument("config file " + path + ": unknown key \"" + key + "\"");
    }
  }
  try {
    get_if(doc, "scenario", scenario_path);
    get_if(doc, "gamma", gamma);
    get_if(doc, "alpha", alpha);
    get_if(doc, "gamma_cov", gamma_cov);
    get_if(doc, "sigma", sigma);
    get_if(doc, "heights", heights);
    get_if(doc, "height_weights", height_weights);
    get_if(doc, "range_offsets", range_offsets);
    get_if(doc, "bearing_granularity_deg", bearing_granularity_deg);
    get_if(doc, "heading_granularity_deg", heading_granularity_deg);
    get_if(doc, "heading_weights", heading_weights);
    get_if(doc, "sweep_granularities_deg", sweep_granularities_deg);
    get_if(doc, "seed", seed);
    get_if(doc, "realizations", realizations);
    get_if(doc, "out_dir", out_dir);
    get_if(doc, "initial_guess", initial_guess);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

void RunConfig::save_file(const std::string& path) const {
  json doc;
  doc["scenario"] = scenario_path;
  doc["gamma"] = gamma;
  doc["alpha"] = alpha;
  doc["gamma_cov"] = gamma_cov;
  doc["sigma"] = sigma;
  doc["heights"] = heights;
  doc["height_weights"] = height_weights;
  doc["range_offsets"] = range_offsets;
  doc["bearing_granularity_deg"] = bearing_granularity_deg;
  doc["heading_granularity_deg"] = heading_granularity_deg;
  doc["heading_weights"] = heading_weights;
  doc["sweep_granularities_deg"] = sweep_granularities_deg;
  doc["seed"] = seed;
  doc["realizations"] = realizations;
  doc["out_dir"] = out_dir;
  doc["initial_guess"] = initial_guess;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << doc.dump(2) << "\n";
}

void RunConfig::validate() const {
  if (gamma_cov.size() != 4) {
    throw std::invalid_argument("gamma_cov needs 4 entries");
  }
  if (initial_guess.size() != 4) {
    throw std::invalid_argument("initial_guess needs 4 entries [x, y, z, theta_deg]");
  }
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (sweep_granularities_deg.empty()) {
    throw std::invalid_argument("sweep granularity list is empty");
  }
  filter_setup().base.validate();
  filter_setup().config.validate();
}

sim::Scenario RunConfig::scenario() const {
  if (scenario_path.empty()) return sim::build_default_scenario();
  return load_scenario(scenario_path);
}

sim::FilterSetup RunConfig::filter_setup() const {
  sim::FilterSetup setup;
  setup.base.heights = heights;
  setup.base.height_weights = height_weights;
  setup.base.range_offsets = range_offsets;
  setup.base.bearing_granularity = deg_to_rad(bearing_granularity_deg);
  setup.base.heading_granularity = deg_to_rad(heading_granularity_deg);
  setup.base.heading_weights = heading_weights;
  setup.config.gamma = gamma;
  setup.config.alpha = alpha;
  const double deg = deg_to_rad(1.0);
  setup.config.gamma_cov =
      Eigen::Vector4d(gamma_cov[0], gamma_cov[1], gamma_cov[2],
                      gamma_cov[3] * deg * deg);
  setup.likelihood_sigma = sigma;
  setup.initial_guess = StateVector(initial_guess[0], initial_guess[1],
                                    initial_guess[2], deg_to_rad(initial_guess[3]));
  return setup;
}

}  // namespace rbinit::io
