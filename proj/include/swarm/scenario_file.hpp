#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/sim.hpp"

namespace swarm::io {

/// Malformed scenario document. `line` is 1-based; 0 when no position applies.
class ScenarioFileError : public std::runtime_error {
 public:
  ScenarioFileError(const std::string& origin, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// One `--set key=value` override. Keys are dotted paths into the document
/// (`params.v_max`, `robots.0.target`); a key that is not a top-level field is looked up
/// under `params`, so `v_max=2` is shorthand for `params.v_max=2`. The value is YAML.
struct Override {
  std::string key;
  std::string value;

  /// Splits "key=value"; throws std::invalid_argument without '='.
  static Override parse(const std::string& text);
};

/// Parses and validates a scenario document. `origin` names the source in messages.
/// Throws ScenarioFileError for syntax and structure problems and std::invalid_argument
/// when the scenario parses but breaks a parameter or placement requirement.
sim::Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>",
                             const std::vector<Override>& overrides = {});

sim::Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

/// Canonical document: fixed key order, every parameter spelled out, shortest
/// round-trip number formatting. parse(dump(s)) reproduces s exactly.
std::string dump_scenario(const sim::Scenario& scenario);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double x);

}  // namespace swarm::io
