#include "rbinit/io/scenario_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rbinit::io {
namespace {

using nlohmann::json;

std::vector<Eigen::Vector3d> parse_points(const json& arr, const char* field) {
  if (!arr.is_array()) {
    throw std::invalid_argument(std::string(field) + " must be an array");
  }
  std::vector<Eigen::Vector3d> out;
  out.reserve(arr.size());
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 3) {
      throw std::invalid_argument(std::string(field) + " entries must be [x, y, z]");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  return out;
}

}  // namespace

sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument("scenario file " + path + ": " + e.what());
  }

  sim::Scenario sc;
  try {
    sc.ref_waypoints = parse_points(doc.at("ref_waypoints"), "ref_waypoints");
    sc.agent_waypoints = parse_points(doc.at("agent_waypoints"), "agent_waypoints");
    for (const json& pair : doc.at("ranging_schedule")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw std::invalid_argument("ranging_schedule entries must be [ref, agent]");
      }
      sc.ranging_schedule.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    sc.range_noise_scale = doc.at("sigma").get<double>();
    const json& diag = doc.at("dr_noise_diag");
    if (!diag.is_array() || diag.size() != 4) {
      throw std::invalid_argument("dr_noise_diag must have 4 entries");
    }
    for (int i = 0; i < 4; ++i) sc.dr_noise_diag[i] = diag[std::size_t(i)].get<double>();
    if (doc.contains("step_length")) {
      sc.step_length = doc.at("step_length").get<double>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument("scenario file " + path + ": " + e.what());
  }
  sc.validate();
  return sc;
}

void save_scenario(const sim::Scenario& sc, const std::string& path) {
  json doc;
  for (const auto& p : sc.ref_waypoints) {
    doc["ref_waypoints"].push_back({p[0], p[1], p[2]});
  }
  for (const auto& p : sc.agent_waypoints) {
    doc["agent_waypoints"].push_back({p[0], p[1], p[2]});
  }
  for (const auto& [r, a] : sc.ranging_schedule) {
    doc["ranging_schedule"].push_back({r, a});
  }
  doc["sigma"] = sc.range_noise_scale;
  doc["dr_noise_diag"] = {sc.dr_noise_diag[0], sc.dr_noise_diag[1],
                          sc.dr_noise_diag[2], sc.dr_noise_diag[3]};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace rbinit::io
