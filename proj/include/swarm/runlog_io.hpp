#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "swarm/sim.hpp"

namespace swarm::io {

/// Unreadable or inconsistent run log; the message carries the 1-based line.
class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-delimited JSON: one `scenario` header line (the canonical scenario document),
/// one `round` line per planning round, and a closing `outcome` line. Planned states are
/// not stored; they are re-derived from the start state and inputs on load.
void write_runlog(std::ostream& out, const sim::RunLog& log);
void save_runlog(const std::filesystem::path& path, const sim::RunLog& log);

sim::RunLog read_runlog(std::istream& in, const std::string& origin = "<stream>");
sim::RunLog load_runlog(const std::filesystem::path& path);

/// Executed states at every round start plus the final state:
/// t, robot, px, py[, pz], vx, vy[, vz].
void write_trajectory_csv(std::ostream& out, const sim::RunLog& log);

/// Metrics and safety summary of a run as a JSON object (pretty-printed).
std::string metrics_summary_json(const sim::RunLog& log);

}  // namespace swarm::io
