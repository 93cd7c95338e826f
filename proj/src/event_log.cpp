#include "rbinit/io/event_log.hpp"

#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace rbinit::io {
namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& why) {
  throw std::invalid_argument("event log line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::vector<LoggedEvent> read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open event log: " + path);

  std::vector<LoggedEvent> events;
  std::string line;
  std::size_t line_no = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      parse_fail(line_no, e.what());
    }
    LoggedEvent ev;
    try {
      ev.t = doc.at("t").get<double>();
      if (doc.contains("range")) {
        ev.is_range = true;
        ev.meas.value = doc.at("range").get<double>();
        const json& ref = doc.at("ref");
        if (!ref.is_array() || ref.size() != 3) parse_fail(line_no, "ref must be [x, y, z]");
        for (int i = 0; i < 3; ++i) ev.meas.ref_position[i] = ref[std::size_t(i)].get<double>();
        if (!(ev.meas.value >= 0.0)) parse_fail(line_no, "range must be >= 0");
      } else if (doc.contains("dr")) {
        const json& dr = doc.at("dr");
        if (!dr.is_array() || dr.size() != 4) {
          parse_fail(line_no, "dr must be [dx, dy, dz, dtheta]");
        }
        ev.u.dx = dr[0].get<double>();
        ev.u.dy = dr[1].get<double>();
        ev.u.dz = dr[2].get<double>();
        ev.u.dtheta = dr[3].get<double>();
        const json& q = doc.at("Q_diag");
        if (!q.is_array() || q.size() != 4) parse_fail(line_no, "Q_diag must have 4 entries");
        ev.u.q.setZero();
        for (int i = 0; i < 4; ++i) {
          const double v = q[std::size_t(i)].get<double>();
          if (!(v >= 0.0)) parse_fail(line_no, "Q_diag entries must be >= 0");
          ev.u.q(i, i) = v;
        }
      } else {
        parse_fail(line_no, "expected a \"dr\" or \"range\" event");
      }
    } catch (const json::exception& e) {
      parse_fail(line_no, e.what());
    }
    if (ev.t < last_t) parse_fail(line_no, "timestamps must be non-decreasing");
    last_t = ev.t;
    events.push_back(ev);
  }
  return events;
}

void write_event_log(const sim::SynthesizedRun& run, std::ostream& out) {
  // Merge increments and measurements in time order; a measurement fires
  // after the increment that completes its step.
  std::size_t next_inc = 0;
  auto dump_increment = [&](const sim::DeadReckoningEvent& ev) {
    json doc;
    doc["t"] = ev.t;
    doc["dr"] = {ev.u.dx, ev.u.dy, ev.u.dz, ev.u.dtheta};
    doc["Q_diag"] = {ev.u.q(0, 0), ev.u.q(1, 1), ev.u.q(2, 2), ev.u.q(3, 3)};
    out << doc.dump() << "\n";
  };
  for (const sim::SynthRangeEvent& m : run.measurements) {
    while (next_inc < m.after_step && next_inc < run.increments.size()) {
      dump_increment(run.increments[next_inc++]);
    }
    json doc;
    doc["t"] = m.t;
    doc["range"] = m.meas.value;
    doc["ref"] = {m.meas.ref_position[0], m.meas.ref_position[1],
                  m.meas.ref_position[2]};
    out << doc.dump() << "\n";
  }
  while (next_inc < run.increments.size()) dump_increment(run.increments[next_inc++]);
}

void write_event_log(const sim::SynthesizedRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write event log: " + path);
  write_event_log(run, out);
}

std::string snapshot_to_json_line(const Snapshot& snap) {
  json doc;
  doc["ell"] = snap.ell;
  doc["x0_hat"] = {snap.x0_hat[0], snap.x0_hat[1], snap.x0_hat[2], snap.x0_hat[3]};
  doc["P0_diag"] = {snap.p0_diag[0], snap.p0_diag[1], snap.p0_diag[2], snap.p0_diag[3]};
  json p0 = json::array();
  for (int r = 0; r < 4; ++r) {
    p0.push_back({snap.p0(r, 0), snap.p0(r, 1), snap.p0(r, 2), snap.p0(r, 3)});
  }
  doc["P0"] = p0;
  doc["x_hat"] = {snap.x_hat[0], snap.x_hat[1], snap.x_hat[2], snap.x_hat[3]};
  json particles = json::array();
  for (const SnapshotParticle& p : snap.particles) {
    json entry;
    entry["index"] = p.index;
    entry["p0"] = {p.p0[0], p.p0[1], p.p0[2]};
    entry["theta0"] = p.theta0;
    entry["weight"] = p.weight;
    particles.push_back(entry);
  }
  doc["particles"] = particles;
  return doc.dump();
}

void write_snapshots(const std::vector<Snapshot>& snaps, std::ostream& out) {
  for (const Snapshot& s : snaps) out << snapshot_to_json_line(s) << "\n";
}

}  // namespace rbinit::io
