#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm/coordination.hpp"
#include "swarm/dynamics.hpp"
#include "swarm/geometry.hpp"
#include "swarm/mpc.hpp"
#include "swarm/pathfind.hpp"
#include "swarm/qp.hpp"

namespace swarm::sim {

using geom::ConvexObstacle;
using geom::Point;
using geom::PointList;

struct RobotSpec {
  Point start;
  Point target;
};

/// All tunables of a run. Defaults are the 2D ground-robot parameters.
struct SimParams {
  dyn::Limits limits;
  double r_a = 0.3;  ///< robot radius (obstacle clearance)
  coord::InterRobotParams inter;
  double q_smooth = 1.0;
  double q_terminal = 10.0;
  /// Ellipsoid scaling of inter-robot distances; absent means Euclidean.
  std::optional<Eigen::MatrixXd> E;
  int threads = 1;
  qp::SolverOptions solver;
  path::PlannerOptions planner;
  double goal_tol = 1e-3;
  double speed_tol = 1e-3;

  void validate(int dim) const;
  /// Speed bound implied by the velocity constraint, v_max / lambda_min(theta_v).
  double max_speed(int dim) const;
  /// Extended minimum distance; uses |E| so the inter-sample argument holds in scaled space.
  double r_prime(int dim) const;
  /// Obstacle clearance enforced at samples: r_a plus the largest deviation of the executed
  /// (quadratic) path from the chord between samples, h^2 a / 8.
  double clearance(int dim) const;
  /// Bound on |p_k - p_0| over the horizon.
  double reach(int dim) const;
};

struct Scenario {
  std::string name;
  int dim = 2;
  std::vector<ConvexObstacle> obstacles;
  std::vector<RobotSpec> robots;
  SimParams params;
  double time_cap = 60.0;

  /// Throws std::invalid_argument naming the first broken requirement: parameters within
  /// range, starts and targets at least the corridor clearance from every obstacle, starts
  /// at least r'_min apart and targets at least r'_min + 2 epsilon apart (E-scaled if set).
  void validate() const;
};

/// Per-robot record of one planning round.
struct RobotRound {
  dyn::Trajectory plan;
  std::map<std::size_t, double> w;
  Point tractive;
  double eta = 0.0;  ///< value used in this round's penalty weights
  bool b_to = false; ///< terminal overlap detected after this round's solve
  bool used_fallback = false;
  std::string solver_status;
  int iterations = 0;
  double solve_ms = 0.0;
  std::size_t corridor_planes = 0;
  /// Min slack of the predetermined points against their corridor;
  /// infinity when the corridor has no planes.
  double corridor_slack = 0.0;
};

struct Round {
  int index = 0;
  double t = 0.0;
  std::vector<RobotRound> robots;
};

enum class Outcome { completed, timeout, invariant_breach };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct RunLog {
  Scenario scenario;
  std::vector<Round> rounds;
  Outcome outcome = Outcome::timeout;
  double end_time = 0.0;
  std::string diagnostic;
  std::vector<dyn::State> final_states;
};

/// Slack below which the per-round corridor check fails.
inline constexpr double kCorridorSlackTol = 1e-9;

/// Synchronous lock-step loop. Planning inside a round only reads the round-start snapshot,
/// so the result does not depend on params.threads.
RunLog run_scenario(const Scenario& scenario);

/// Dense sampling step of the safety check.
inline constexpr double kSafetySampleDt = 0.01;
inline constexpr double kSafetyTol = 1e-6;

struct SafetyReport {
  double min_pairwise = 0.0;   ///< infinity with fewer than two robots
  double min_clearance = 0.0;  ///< infinity without obstacles
  std::optional<double> first_violation;
  std::string detail;

  bool safe() const { return !first_violation.has_value(); }
};

/// Samples the executed quadratic segments every 10 ms.
SafetyReport check_safety(const RunLog& log);

struct Metrics {
  std::optional<double> transition_time;    ///< T_t, s
  std::optional<double> transition_length;  ///< L_t, m (sum over robots)
  double mean_compute_ms = 0.0;             ///< T_c, per robot per round
  std::size_t fallback_count = 0;
  std::size_t solves = 0;
  std::size_t rounds = 0;
  double max_eta = 0.0;
  std::size_t eta_resets = 0;  ///< eta dropping from > 0 back to 0
};

Metrics metrics(const RunLog& log);

/// Executed position of a robot at time t (clamped to the logged span).
Point executed_position(const RunLog& log, std::size_t robot, double t);

}  // namespace swarm::sim
