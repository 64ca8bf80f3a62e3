// Command-line front end: run scenarios, plot and check logs, list bundled scenarios.

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "swarm/generate.hpp"
#include "swarm/plot.hpp"
#include "swarm/runlog_io.hpp"
#include "swarm/scenario_file.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kTimeout = 2, kBreach = 3 };

fs::path scenario_dir() {
  if (const char* env = std::getenv("SWARMPLAN_SCENARIOS")) return env;
  return SWARMPLAN_DEFAULT_SCENARIO_DIR;
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SWARMPLAN_OUT_DIR")) return env;
  return "runs";
}

/// A path as given, or the name of a bundled scenario (with or without .yaml).
fs::path resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const fs::path& cand : std::array{scenario_dir() / arg, scenario_dir() / (arg + ".yaml")}) {
    if (fs::exists(cand)) return cand;
  }
  throw std::runtime_error("no scenario file '" + arg + "' (also looked in " + scenario_dir().string() + ")");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void print_summary(const sim::RunLog& log) {
  const sim::Metrics m = sim::metrics(log);
  const sim::SafetyReport s = sim::check_safety(log);
  std::printf("%-16s %s\n", "scenario", log.scenario.name.c_str());
  std::printf("%-16s %s at t = %.2f s\n", "outcome", sim::to_string(log.outcome).c_str(), log.end_time);
  if (m.transition_time) std::printf("%-16s %.2f s\n", "T_t", *m.transition_time);
  if (m.transition_length) std::printf("%-16s %.2f m\n", "L_t", *m.transition_length);
  std::printf("%-16s %.3f ms\n", "T_c", m.mean_compute_ms);
  std::printf("%-16s %zu / %zu solves\n", "fallbacks", m.fallback_count, m.solves);
  std::printf("%-16s %.1f (%zu resets)\n", "max eta", m.max_eta, m.eta_resets);
  std::printf("%-16s %.4f m\n", "min pairwise", s.min_pairwise);
  std::printf("%-16s %.4f m\n", "min clearance", s.min_clearance);
  if (!log.diagnostic.empty()) std::printf("%-16s %s\n", "diagnostic", log.diagnostic.c_str());
}

int cmd_run(const std::string& scenario_arg, const std::vector<std::string>& sets, const std::string& out_flag,
            std::optional<int> threads, bool quiet) {
  std::vector<io::Override> overrides;
  for (const auto& s : sets) overrides.push_back(io::Override::parse(s));
  if (threads) overrides.push_back({"threads", std::to_string(*threads)});
  const fs::path path = resolve_scenario(scenario_arg);
  const sim::Scenario sc = io::load_scenario(path, overrides);

  const sim::RunLog log = sim::run_scenario(sc);

  const fs::path out = output_dir(out_flag);
  fs::create_directories(out);
  const std::string stem = path.stem().string();
  io::save_runlog(out / (stem + ".jsonl"), log);
  {
    std::ofstream csv(out / (stem + ".csv"));
    if (!csv) throw std::runtime_error("cannot write '" + (out / (stem + ".csv")).string() + "'");
    io::write_trajectory_csv(csv, log);
  }
  write_text(out / (stem + ".metrics.json"), io::metrics_summary_json(log) + "\n");
  if (!quiet) {
    print_summary(log);
    std::printf("%-16s %s\n", "log", (out / (stem + ".jsonl")).string().c_str());
  }

  switch (log.outcome) {
    case sim::Outcome::completed:
      if (const auto s = sim::check_safety(log); !s.safe()) {
        std::fprintf(stderr, "safety violation: %s\n", s.detail.c_str());
        return kBreach;
      }
      return kOk;
    case sim::Outcome::timeout: return kTimeout;
    case sim::Outcome::invariant_breach:
      std::fprintf(stderr, "invariant breach: %s\n", log.diagnostic.c_str());
      return kBreach;
  }
  return kBreach;
}

int cmd_plot(const std::string& log_path, const std::string& out_flag) {
  const sim::RunLog log = io::load_runlog(log_path);
  const fs::path out = out_flag.empty() ? fs::path(log_path).replace_extension(".svg") : fs::path(out_flag);
  write_text(out, io::render_svg(log));
  std::printf("wrote %s\n", out.string().c_str());
  return kOk;
}

int cmd_check(const std::string& log_path) {
  const sim::RunLog log = io::load_runlog(log_path);
  const sim::SafetyReport s = sim::check_safety(log);
  std::printf("min pairwise  %.6f m (r_min %.3f)\n", s.min_pairwise, log.scenario.params.inter.r_min);
  std::printf("min clearance %.6f m (r_a %.3f)\n", s.min_clearance, log.scenario.params.r_a);
  if (s.safe()) {
    std::printf("clean\n");
    return kOk;
  }
  std::printf("violation at t = %.3f s: %s\n", *s.first_violation, s.detail.c_str());
  return kBreach;
}

int cmd_list() {
  const fs::path dir = scenario_dir();
  if (!fs::is_directory(dir)) throw std::runtime_error("scenario directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".yaml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const sim::Scenario sc = io::load_scenario(f);
      std::printf("%-16s %dD  %zu robots  %2zu obstacles  %s\n", f.stem().string().c_str(), sc.dim, sc.robots.size(),
                  sc.obstacles.size(), f.string().c_str());
    } catch (const std::exception& e) {
      std::printf("%-16s INVALID: %s\n", f.stem().string().c_str(), e.what());
    }
  }
  return kOk;
}

int cmd_generate(const std::string& kind, std::uint64_t seed, const std::string& out_flag) {
  sim::Scenario sc;
  if (kind == "forest") {
    sc = gen::forest_scenario(seed);
  } else if (kind == "random") {
    sc = gen::random_scenario(seed);
  } else {
    throw std::invalid_argument("unknown generator '" + kind + "' (forest, random)");
  }
  sc.validate();
  const std::string text = "# generated: swarmplan generate " + kind + " --seed " + std::to_string(seed) + "\n" +
                           io::dump_scenario(sc);
  if (out_flag.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text(out_flag, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot receding-horizon trajectory planner and simulator"};
  app.require_subcommand(1);

  std::string scenario_arg, out_flag, log_path, plot_out, kind, gen_out;
  std::vector<std::string> sets;
  std::optional<int> threads;
  bool quiet = false;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "Simulate a scenario; writes <name>.jsonl, .csv and .metrics.json");
  run->add_option("scenario", scenario_arg, "Scenario file or bundled scenario name")->required();
  run->add_option("--set", sets, "Override, key=value (dotted keys; bare keys are params)")->allow_extra_args(false);
  run->add_option("-o,--out", out_flag, "Output directory (default: $SWARMPLAN_OUT_DIR or ./runs)");
  run->add_option("-j,--threads", threads, "Planning threads per round")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* plot = app.add_subcommand("plot", "Render a run log as SVG");
  plot->add_option("log", log_path, "Run log (.jsonl)")->required();
  plot->add_option("-o,--out", plot_out, "SVG path (default: next to the log)");

  auto* check = app.add_subcommand("check", "Re-check a run log for collisions at 10 ms sampling");
  check->add_option("log", log_path, "Run log (.jsonl)")->required();

  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");

  auto* generate = app.add_subcommand("generate", "Write a seeded random scenario");
  generate->add_option("kind", kind, "forest or random")->required();
  generate->add_option("--seed", seed, "Random seed");
  generate->add_option("-o,--out", gen_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(scenario_arg, sets, out_flag, threads, quiet);
    if (*plot) return cmd_plot(log_path, plot_out);
    if (*check) return cmd_check(log_path);
    if (*list) return cmd_list();
    if (*generate) return cmd_generate(kind, seed, gen_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
