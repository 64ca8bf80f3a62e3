#include "swarm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "swarm/corridor.hpp"

namespace swarm::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

void check_spd(const Eigen::MatrixXd& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument(std::string(what) + " has the wrong size");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument(std::string(what) + " must be symmetric");
  if (!(min_eigenvalue(m) > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive definite");
}

double scaled_distance(const std::optional<Eigen::MatrixXd>& E, const Point& a, const Point& b) {
  return E ? (*E * (a - b)).norm() : (a - b).norm();
}

std::string point_str(const Point& p) {
  std::ostringstream s;
  s << '(';
  for (Eigen::Index i = 0; i < p.size(); ++i) s << (i ? ", " : "") << p[i];
  s << ')';
  return s.str();
}

/// Mutable per-robot state owned by the loop.
struct RobotState {
  dyn::State x;
  coord::RobotRuntime rt;
};

struct RoundContext {
  const Scenario& sc;
  double r_prime;
  double clearance;
  double reach;
  mpc::CostWeights weights;
};

/// Plans one robot for one round from the round-start snapshot `preds`.
RobotRound plan_robot(const RoundContext& ctx, std::size_t i, RobotState& me, const std::vector<PointList>& preds) {
  const Scenario& sc = ctx.sc;
  const SimParams& prm = sc.params;
  const auto t_start = std::chrono::steady_clock::now();
  auto& rt = me.rt;
  const Point terminal = rt.pred.back();

  if (path::needs_replan(rt.path, rt.target, terminal, sc.obstacles, ctx.clearance)) {
    rt.path = path::PathCache{path::plan_path(terminal, rt.target, sc.obstacles, ctx.clearance, prm.planner), rt.target};
  }
  const auto tractive = path::select_tractive_point(rt.path->path, terminal, sc.obstacles, ctx.clearance);
  if (!tractive) throw path::Unreachable("no tractive point visible from the predetermined terminal point");

  const corridor::Ept ept = corridor::build_ept(rt.pred, *tractive, rt.b_to, me.x.p);
  const auto segments = corridor::segment_division(ept, sc.obstacles, ctx.clearance);
  mpc::PlanInputs in;
  in.corridor = corridor::build_corridor(segments, ept, sc.obstacles, ctx.clearance, me.x.p, {ctx.reach});

  RobotRound rec;
  rec.corridor_planes = in.corridor.plane_count();
  rec.corridor_slack = in.corridor.min_slack(rt.pred);
  if (rec.corridor_slack < -kCorridorSlackTol) {
    throw corridor::CorridorError("predetermined trajectory violates its own corridor by " +
                                  std::to_string(-rec.corridor_slack));
  }

  std::vector<coord::NeighborPrediction> neighbors;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (j != i) neighbors.push_back({j, preds[j]});
  }
  in.inter = coord::interrobot_constraints(rt.pred, neighbors, ctx.r_prime, prm.E);
  for (const auto& nb : neighbors) {
    const double theta = coord::bearing_angle(terminal, rt.target, nb.pred.back());
    const double rho = coord::rho(prm.inter.rho0, rt.eta, theta);
    in.band_coefficients.push_back(coord::warning_band_coefficient(rt.gamma.at(nb.id), rho, prm.inter.epsilon));
  }
  in.x0 = me.x;
  in.limits = prm.limits;
  in.weights = ctx.weights;
  in.tractive = *tractive;
  in.epsilon = prm.inter.epsilon;

  mpc::PlanResult res = mpc::solve_replan(in, rt.last_plan, prm.solver);

  rec.tractive = *tractive;
  rec.eta = rt.eta;
  rec.used_fallback = res.used_fallback;
  rec.solver_status = qp::to_string(res.solver_status);
  rec.iterations = res.iterations;
  rec.w = res.w;

  const PointList planned = res.trajectory.positions();
  const PointList previous = rt.last_plan ? rt.last_plan->positions() : PointList{};
  rt.b_to = coord::detect_terminal_overlap(planned, previous, rt.target, prm.inter.overlap_tol);
  const double eps = prm.inter.epsilon;
  const bool no_contact =
      std::all_of(res.w.begin(), res.w.end(), [&](const auto& kv) { return kv.second >= eps - 1e-9; });
  rt.eta = coord::update_eta(rt.eta, rt.b_to, no_contact, prm.inter.delta_eta, prm.inter.eta_max);
  for (auto& [j, g] : rt.gamma) g = coord::update_gamma(g, res.w.at(j), prm.inter.beta, prm.inter.epsilon);
  rt.pred = mpc::make_predetermined(res.trajectory);
  rt.last_plan = res.trajectory;
  rec.b_to = rt.b_to;
  rec.plan = std::move(res.trajectory);

  rec.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  return rec;
}

}  // namespace

void SimParams::validate(int dim) const {
  limits.validate(dim);
  inter.validate();
  if (!(r_a > 0.0)) throw std::invalid_argument("params: r_a must be positive");
  if (!(q_smooth >= 0.0)) throw std::invalid_argument("params: q_smooth must be non-negative");
  if (!(q_terminal > 0.0)) throw std::invalid_argument("params: q_terminal must be positive");
  if (E) check_spd(*E, dim, "params: E");
  if (threads < 1) throw std::invalid_argument("params: threads must be at least 1");
  if (!(goal_tol > 0.0) || !(speed_tol > 0.0)) throw std::invalid_argument("params: tolerances must be positive");
  if (!(planner.grid_step > 0.0) || !(planner.node_margin >= 0.0)) {
    throw std::invalid_argument("params: planner settings must be positive");
  }
}

double SimParams::max_speed(int dim) const { return limits.v_max / min_eigenvalue(limits.theta_v_or_identity(dim)); }

double SimParams::r_prime(int dim) const {
  const double scale = E ? Eigen::JacobiSVD<Eigen::MatrixXd>(*E).singularValues()(0) : 1.0;
  return coord::extended_min_distance(inter.r_min, limits.h, max_speed(dim) * scale);
}

double SimParams::clearance(int dim) const {
  return r_a + limits.h * limits.h * limits.max_accel_norm(dim) / 8.0;
}

double SimParams::reach(int dim) const { return limits.K * limits.h * max_speed(dim); }

void Scenario::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("scenario: dim must be 2 or 3");
  params.validate(dim);
  if (!(time_cap > 0.0)) throw std::invalid_argument("scenario: time_cap must be positive");
  if (robots.empty()) throw std::invalid_argument("scenario: at least one robot is required");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].dim() != dim) throw std::invalid_argument("scenario: obstacle " + std::to_string(i) + " has the wrong dimension");
  }
  const double clear = params.clearance(dim);
  const double rp = params.r_prime(dim);
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const auto& r = robots[i];
    if (r.start.size() != dim || r.target.size() != dim) {
      throw std::invalid_argument("scenario: robot " + std::to_string(i) + " has the wrong dimension");
    }
    for (const auto* p : {&r.start, &r.target}) {
      const double c = geom::clearance_of(*p, obstacles);
      if (c < clear) {
        std::ostringstream msg;
        msg << "scenario: robot " << i << (p == &r.start ? " start " : " target ") << point_str(*p)
            << " has obstacle clearance " << c << " < " << clear;
        throw std::invalid_argument(msg.str());
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (scaled_distance(params.E, r.start, robots[j].start) < rp) {
        throw std::invalid_argument("scenario: starts of robots " + std::to_string(j) + " and " + std::to_string(i) +
                                    " are closer than r'_min = " + std::to_string(rp));
      }
      // Robots resting at their targets must not sit inside each other's warning band, or
      // the band penalty would hold them off their targets indefinitely.
      const double target_sep = rp + 2.0 * params.inter.epsilon;
      if (scaled_distance(params.E, r.target, robots[j].target) < target_sep) {
        throw std::invalid_argument("scenario: targets of robots " + std::to_string(j) + " and " +
                                    std::to_string(i) + " are closer than r'_min + 2 epsilon = " +
                                    std::to_string(target_sep));
      }
    }
  }
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::timeout: return "timeout";
    case Outcome::invariant_breach: return "invariant_breach";
  }
  return "unknown";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "completed") return Outcome::completed;
  if (s == "timeout") return Outcome::timeout;
  if (s == "invariant_breach") return Outcome::invariant_breach;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

RunLog run_scenario(const Scenario& sc) {
  sc.validate();
  const int d = sc.dim;
  const SimParams& prm = sc.params;
  const std::size_t n = sc.robots.size();
  const RoundContext ctx{sc, prm.r_prime(d), prm.clearance(d), prm.reach(d),
                         mpc::CostWeights::uniform(prm.limits.K, prm.q_smooth, prm.q_terminal)};

  RunLog log;
  log.scenario = sc;
  std::vector<RobotState> robots;
  robots.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    robots.push_back({dyn::State{sc.robots[i].start, Point::Zero(d)},
                      coord::RobotRuntime::initial(sc.robots[i].start, sc.robots[i].target, prm.limits.K, others,
                                                   prm.inter.epsilon)});
  }

  auto finished = [&] {
    return std::all_of(robots.begin(), robots.end(), [&](const RobotState& r) {
      return (r.x.p - r.rt.target).norm() <= prm.goal_tol && r.x.v.norm() < prm.speed_tol;
    });
  };

  const int max_rounds = static_cast<int>(std::floor(sc.time_cap / prm.limits.h + 1e-9));
  for (int round = 0;; ++round) {
    const double t = round * prm.limits.h;
    if (finished()) {
      log.outcome = Outcome::completed;
      log.end_time = t;
      break;
    }
    if (round >= max_rounds) {
      log.outcome = Outcome::timeout;
      log.end_time = t;
      break;
    }

    std::vector<PointList> preds;
    preds.reserve(n);
    for (const auto& r : robots) preds.push_back(r.rt.pred);

    std::vector<RobotRound> results(n);
    std::vector<std::string> errors(n);
    auto work = [&](std::size_t first, std::size_t stride) {
      for (std::size_t i = first; i < n; i += stride) {
        try {
          results[i] = plan_robot(ctx, i, robots[i], preds);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const auto workers = static_cast<std::size_t>(std::min<int>(prm.threads, static_cast<int>(n)));
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }

    const auto bad = std::find_if(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); });
    if (bad != errors.end()) {
      const auto i = static_cast<std::size_t>(bad - errors.begin());
      std::ostringstream msg;
      msg << "round " << round << " (t = " << t << "), robot " << i << " at " << point_str(robots[i].x.p) << ": " << *bad;
      log.outcome = Outcome::invariant_breach;
      log.end_time = t;
      log.diagnostic = msg.str();
      break;
    }

    for (std::size_t i = 0; i < n; ++i) robots[i].x = results[i].plan.states.front();
    log.rounds.push_back(Round{round, t, std::move(results)});
  }

  for (const auto& r : robots) log.final_states.push_back(r.x);
  return log;
}

namespace {

/// Executed segment of robot i during round r: start state and the applied input.
struct Piece {
  const dyn::State* x0;
  const Point* u0;
};

Piece piece(const RunLog& log, std::size_t round, std::size_t robot) {
  const auto& rr = log.rounds[round].robots[robot];
  return {&rr.plan.start, &rr.plan.inputs.front()};
}

}  // namespace

Point executed_position(const RunLog& log, std::size_t robot, double t) {
  const double h = log.scenario.params.limits.h;
  if (log.rounds.empty()) return log.final_states.at(robot).p;
  const double span = static_cast<double>(log.rounds.size()) * h;
  if (t >= span) return log.final_states.at(robot).p;
  t = std::max(t, 0.0);
  auto r = static_cast<std::size_t>(std::floor(t / h));
  r = std::min(r, log.rounds.size() - 1);
  const Piece pc = piece(log, r, robot);
  return dyn::position_within_step(*pc.x0, *pc.u0, t - static_cast<double>(r) * h);
}

SafetyReport check_safety(const RunLog& log) {
  const Scenario& sc = log.scenario;
  const std::size_t n = sc.robots.size();
  const double h = sc.params.limits.h;
  const int sub = std::max(1, static_cast<int>(std::ceil(h / kSafetySampleDt - 1e-9)));
  const double r_min = sc.params.inter.r_min;
  const double r_a = sc.params.r_a;

  SafetyReport rep;
  rep.min_pairwise = kInf;
  rep.min_clearance = kInf;
  PointList pos(n);
  auto inspect = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double c = geom::clearance_of(pos[i], sc.obstacles);
      rep.min_clearance = std::min(rep.min_clearance, c);
      if (c < r_a - kSafetyTol && !rep.first_violation) {
        rep.first_violation = t;
        std::ostringstream s;
        s << "robot " << i << " at " << point_str(pos[i]) << " is " << c << " from the nearest obstacle at t = " << t;
        rep.detail = s.str();
      }
      for (std::size_t j = 0; j < i; ++j) {
        const double dist = scaled_distance(sc.params.E, pos[i], pos[j]);
        rep.min_pairwise = std::min(rep.min_pairwise, dist);
        if (dist < r_min - kSafetyTol && !rep.first_violation) {
          rep.first_violation = t;
          std::ostringstream s;
          s << "robots " << j << " and " << i << " are " << dist << " apart at t = " << t;
          rep.detail = s.str();
        }
      }
    }
  };

  for (std::size_t r = 0; r < log.rounds.size(); ++r) {
    for (int s = 0; s < sub; ++s) {
      const double tau = h * s / sub;
      for (std::size_t i = 0; i < n; ++i) {
        const Piece pc = piece(log, r, i);
        pos[i] = dyn::position_within_step(*pc.x0, *pc.u0, tau);
      }
      inspect(static_cast<double>(r) * h + tau);
    }
  }
  if (log.final_states.size() == n) {
    for (std::size_t i = 0; i < n; ++i) pos[i] = log.final_states[i].p;
    inspect(static_cast<double>(log.rounds.size()) * h);
  }
  return rep;
}

Metrics metrics(const RunLog& log) {
  Metrics m;
  m.rounds = log.rounds.size();
  const std::size_t n = log.scenario.robots.size();
  const double h = log.scenario.params.limits.h;
  double total_ms = 0.0;
  std::vector<double> last_eta(n, 0.0);
  for (const auto& round : log.rounds) {
    for (std::size_t i = 0; i < round.robots.size(); ++i) {
      const auto& rr = round.robots[i];
      ++m.solves;
      total_ms += rr.solve_ms;
      if (rr.used_fallback) ++m.fallback_count;
      m.max_eta = std::max(m.max_eta, rr.eta);
      if (last_eta[i] > 0.0 && rr.eta == 0.0) ++m.eta_resets;
      last_eta[i] = rr.eta;
    }
  }
  m.mean_compute_ms = m.solves ? total_ms / static_cast<double>(m.solves) : 0.0;
  if (log.outcome == Outcome::completed) {
    m.transition_time = log.end_time;
    // Arc length of the quadratic segments, integrated on a fine grid.
    constexpr int kSub = 50;
    double length = 0.0;
    for (std::size_t r = 0; r < log.rounds.size(); ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const Piece pc = piece(log, r, i);
        Point prev = pc.x0->p;
        for (int s = 1; s <= kSub; ++s) {
          const Point cur = dyn::position_within_step(*pc.x0, *pc.u0, h * s / kSub);
          length += (cur - prev).norm();
          prev = cur;
        }
      }
    }
    m.transition_length = length;
  }
  return m;
}

}  // namespace swarm::sim
