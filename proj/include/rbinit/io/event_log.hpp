#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rbinit/dead_reckoning.hpp"
#include "rbinit/initializer.hpp"
#include "rbinit/sim/scenario.hpp"

namespace rbinit::io {

/// One line of a measurement log. Schema (JSON lines, time-ordered):
///   {"t": <s>, "dr": [dx, dy, dz, dtheta], "Q_diag": [4 variances]}
///   {"t": <s>, "range": <m>, "ref": [x, y, z]}
struct LoggedEvent {
  double t = 0.0;
  bool is_range = false;
  DeadReckoningIncrement u;  // valid when !is_range
  RangeMeasurement meas;     // valid when is_range
};

/// Parses a log; throws std::invalid_argument naming the offending line for
/// malformed JSON, unknown shapes, or timestamps that go backwards.
std::vector<LoggedEvent> read_event_log(const std::string& path);

void write_event_log(const sim::SynthesizedRun& run, std::ostream& out);
void write_event_log(const sim::SynthesizedRun& run, const std::string& path);

/// One snapshot JSON document per line, fields "ell", "x0_hat", "P0_diag",
/// "P0", "x_hat", "particles".
std::string snapshot_to_json_line(const Snapshot& snap);
void write_snapshots(const std::vector<Snapshot>& snaps, std::ostream& out);

}  // namespace rbinit::io
