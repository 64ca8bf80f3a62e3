#include "swarm/runlog_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "swarm/scenario_file.hpp"

namespace swarm::io {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json point_json(const geom::Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

geom::Point point_from(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw std::invalid_argument("expected a point of dimension " + std::to_string(dim));
  geom::Point p(dim);
  for (int i = 0; i < dim; ++i) p[i] = j.at(i).get<double>();
  return p;
}

json robot_round_json(const sim::RobotRound& rr) {
  json inputs = json::array();
  for (const auto& u : rr.plan.inputs) inputs.push_back(point_json(u));
  json w = json::object();
  for (const auto& [j, v] : rr.w) w[std::to_string(j)] = v;
  return {
      {"p0", point_json(rr.plan.start.p)},
      {"v0", point_json(rr.plan.start.v)},
      {"inputs", std::move(inputs)},
      {"w", std::move(w)},
      {"tractive", point_json(rr.tractive)},
      {"eta", rr.eta},
      {"b_to", rr.b_to},
      {"fallback", rr.used_fallback},
      {"status", rr.solver_status},
      {"iterations", rr.iterations},
      {"solve_ms", rr.solve_ms},
      {"corridor_planes", rr.corridor_planes},
      {"corridor_slack", std::isfinite(rr.corridor_slack) ? json(rr.corridor_slack) : json(nullptr)},
  };
}

sim::RobotRound robot_round_from(const json& j, int dim, double h) {
  sim::RobotRound rr;
  const dyn::State x0{point_from(j.at("p0"), dim), point_from(j.at("v0"), dim)};
  std::vector<geom::Point> inputs;
  for (const auto& u : j.at("inputs")) inputs.push_back(point_from(u, dim));
  if (inputs.empty()) throw std::invalid_argument("a plan needs at least one input");
  rr.plan = dyn::rollout(x0, inputs, h);
  for (const auto& [k, v] : j.at("w").items()) rr.w[std::stoul(k)] = v.get<double>();
  rr.tractive = point_from(j.at("tractive"), dim);
  rr.eta = j.at("eta").get<double>();
  rr.b_to = j.at("b_to").get<bool>();
  rr.used_fallback = j.at("fallback").get<bool>();
  rr.solver_status = j.at("status").get<std::string>();
  rr.iterations = j.at("iterations").get<int>();
  rr.solve_ms = j.at("solve_ms").get<double>();
  rr.corridor_planes = j.at("corridor_planes").get<std::size_t>();
  const auto& slack = j.at("corridor_slack");
  rr.corridor_slack = slack.is_null() ? std::numeric_limits<double>::infinity() : slack.get<double>();
  return rr;
}

}  // namespace

void write_runlog(std::ostream& out, const sim::RunLog& log) {
  out << json{{"type", "scenario"}, {"format", kFormatVersion}, {"scenario", dump_scenario(log.scenario)}}.dump() << '\n';
  for (const auto& round : log.rounds) {
    json robots = json::array();
    for (const auto& rr : round.robots) robots.push_back(robot_round_json(rr));
    out << json{{"type", "round"}, {"index", round.index}, {"t", round.t}, {"robots", std::move(robots)}}.dump() << '\n';
  }
  json finals = json::array();
  for (const auto& s : log.final_states) finals.push_back({{"p", point_json(s.p)}, {"v", point_json(s.v)}});
  out << json{{"type", "outcome"},
              {"outcome", sim::to_string(log.outcome)},
              {"end_time", log.end_time},
              {"diagnostic", log.diagnostic},
              {"final_states", std::move(finals)}}
             .dump()
      << '\n';
}

void save_runlog(const std::filesystem::path& path, const sim::RunLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run log '" + path.string() + "'");
  write_runlog(out, log);
}

sim::RunLog read_runlog(std::istream& in, const std::string& origin) {
  sim::RunLog log;
  bool have_header = false;
  bool have_outcome = false;
  int lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string at = origin + ":" + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (have_outcome) throw std::invalid_argument("content after the outcome line");
      if (type == "scenario") {
        if (have_header) throw std::invalid_argument("second scenario header");
        if (j.at("format").get<int>() != kFormatVersion) throw std::invalid_argument("unsupported log format");
        log.scenario = parse_scenario(j.at("scenario").get<std::string>(), origin + " (scenario header)");
        have_header = true;
      } else if (type == "round") {
        if (!have_header) throw std::invalid_argument("round before the scenario header");
        sim::Round r;
        r.index = j.at("index").get<int>();
        r.t = j.at("t").get<double>();
        if (r.index != static_cast<int>(log.rounds.size())) throw std::invalid_argument("rounds out of order");
        const auto& robots = j.at("robots");
        if (robots.size() != log.scenario.robots.size()) throw std::invalid_argument("robot count does not match the scenario");
        for (const auto& rj : robots) {
          r.robots.push_back(robot_round_from(rj, log.scenario.dim, log.scenario.params.limits.h));
        }
        log.rounds.push_back(std::move(r));
      } else if (type == "outcome") {
        if (!have_header) throw std::invalid_argument("outcome before the scenario header");
        log.outcome = sim::outcome_from_string(j.at("outcome").get<std::string>());
        log.end_time = j.at("end_time").get<double>();
        log.diagnostic = j.at("diagnostic").get<std::string>();
        for (const auto& s : j.at("final_states")) {
          log.final_states.push_back({point_from(s.at("p"), log.scenario.dim), point_from(s.at("v"), log.scenario.dim)});
        }
        if (log.final_states.size() != log.scenario.robots.size()) {
          throw std::invalid_argument("final state count does not match the scenario");
        }
        have_outcome = true;
      } else {
        throw std::invalid_argument("unknown line type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw LogFormatError(at + e.what());
    } catch (const std::exception& e) {
      throw LogFormatError(at + e.what());
    }
  }
  if (!have_header) throw LogFormatError(origin + ": missing scenario header");
  if (!have_outcome) throw LogFormatError(origin + ": missing outcome line (truncated log?)");
  return log;
}

sim::RunLog load_runlog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log '" + path.string() + "'");
  return read_runlog(in, path.string());
}

void write_trajectory_csv(std::ostream& out, const sim::RunLog& log) {
  const int d = log.scenario.dim;
  const char* axes = "xyz";
  out << "t,robot";
  for (int i = 0; i < d; ++i) out << ",p" << axes[i];
  for (int i = 0; i < d; ++i) out << ",v" << axes[i];
  out << '\n';
  auto row = [&](double t, std::size_t robot, const dyn::State& s) {
    out << format_number(t) << ',' << robot;
    for (int i = 0; i < d; ++i) out << ',' << format_number(s.p[i]);
    for (int i = 0; i < d; ++i) out << ',' << format_number(s.v[i]);
    out << '\n';
  };
  for (const auto& round : log.rounds) {
    for (std::size_t i = 0; i < round.robots.size(); ++i) row(round.t, i, round.robots[i].plan.start);
  }
  const double t_end = static_cast<double>(log.rounds.size()) * log.scenario.params.limits.h;
  for (std::size_t i = 0; i < log.final_states.size(); ++i) row(t_end, i, log.final_states[i]);
}

std::string metrics_summary_json(const sim::RunLog& log) {
  const sim::Metrics m = sim::metrics(log);
  const sim::SafetyReport s = sim::check_safety(log);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  const json j = {
      {"scenario", log.scenario.name},
      {"outcome", sim::to_string(log.outcome)},
      {"end_time", log.end_time},
      {"diagnostic", log.diagnostic},
      {"T_t", opt(m.transition_time)},
      {"L_t", opt(m.transition_length)},
      {"T_c_ms", m.mean_compute_ms},
      {"fallback_count", m.fallback_count},
      {"solves", m.solves},
      {"rounds", m.rounds},
      {"max_eta", m.max_eta},
      {"eta_resets", m.eta_resets},
      {"min_pairwise", finite(s.min_pairwise)},
      {"min_clearance", finite(s.min_clearance)},
      {"safe", s.safe()},
      {"first_violation", opt(s.first_violation)},
  };
  return j.dump(2);
}

}  // namespace swarm::io
