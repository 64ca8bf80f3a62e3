#include "swarm/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace swarm::mpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const PlanInputs& in) {
  const int d = in.dim();
  const int K = in.limits.K;
  if (d != 2 && d != 3) throw std::invalid_argument("mpc: dimension must be 2 or 3");
  if (in.x0.v.size() != d || in.tractive.size() != d) throw std::invalid_argument("mpc: state/tractive dimension");
  in.limits.validate(d);
  in.weights.validate(K);
  if (in.band_coefficients.size() != in.inter.size()) {
    throw std::invalid_argument("mpc: one band coefficient per neighbour required");
  }
  for (const auto& c : in.inter) {
    if (c.hard.size() != static_cast<std::size_t>(K - 1)) throw std::invalid_argument("mpc: neighbour horizon");
  }
  if (in.corridor.horizon() != 0 && in.corridor.horizon() != static_cast<std::size_t>(K)) {
    throw std::invalid_argument("mpc: corridor horizon mismatch");
  }
  if (!(in.epsilon > 0.0)) throw std::invalid_argument("mpc: epsilon must be positive");
}

std::vector<Point> scaled_facets(const Eigen::MatrixXd& theta, const geom::BallFacets& facets) {
  std::vector<Point> rows;
  rows.reserve(facets.normals.size());
  for (const auto& n : facets.normals) rows.push_back(theta.transpose() * n);
  return rows;
}

geom::BallFacets facets_for(const PlanInputs& in, double radius) {
  return geom::norm_ball_facets(radius, in.limits.facets, in.dim());
}

}  // namespace

CostWeights CostWeights::uniform(int K, double q_smooth, double q_terminal) {
  CostWeights w;
  w.smooth.assign(static_cast<std::size_t>(std::max(K - 1, 0)), q_smooth);
  w.terminal = q_terminal;
  return w;
}

void CostWeights::validate(int K) const {
  if (smooth.size() != static_cast<std::size_t>(K - 1)) throw std::invalid_argument("weights: need K-1 smoothing weights");
  for (double q : smooth) {
    if (!(q >= 0.0)) throw std::invalid_argument("weights: smoothing weights must be non-negative");
  }
  if (!(terminal > 0.0)) throw std::invalid_argument("weights: terminal weight must be positive");
}

Assembled assemble(const PlanInputs& in) {
  check_inputs(in);
  const int d = in.dim();
  const int K = in.limits.K;
  const int nu = K * d;
  const int m = static_cast<int>(in.inter.size());
  const int n = nu + m;
  const double h = in.limits.h;

  const dyn::CondensedMaps maps = dyn::condensed_maps(K, h, d);
  const Eigen::VectorXd cp = maps.p_affine(in.x0);
  const Eigen::VectorXd cv = maps.v_affine(in.x0);
  auto P = [&](int k) { return maps.P.middleRows((k - 1) * d, d); };
  auto V = [&](int k) { return maps.V.middleRows((k - 1) * d, d); };
  auto c_p = [&](int k) { return cp.segment((k - 1) * d, d); };
  auto c_v = [&](int k) { return cv.segment((k - 1) * d, d); };

  Assembled out;
  auto& qp = out.qp;
  qp = qp::QuadraticProgram::with_variables(n);

  // Cost: 1/2 Q_K |p_K - tractive|^2 + 1/2 sum_k Q_k |p_{k+1} - p_k|^2 + sum_j c_j (eps - w_j)^2.
  auto add_square = [&](double weight, const Eigen::MatrixXd& A, const Eigen::VectorXd& r) {
    qp.H.topLeftCorner(nu, nu).noalias() += weight * A.transpose() * A;
    qp.f.head(nu).noalias() += weight * A.transpose() * r;
    out.constant += 0.5 * weight * r.squaredNorm();
  };
  add_square(in.weights.terminal, P(K), c_p(K) - Eigen::VectorXd(in.tractive));
  for (int k = 1; k < K; ++k) {
    const double q = in.weights.smooth[static_cast<std::size_t>(k - 1)];
    if (q > 0.0) add_square(q, P(k + 1) - P(k), c_p(k + 1) - c_p(k));
  }
  for (int j = 0; j < m; ++j) {
    const double c = in.band_coefficients[static_cast<std::size_t>(j)];
    qp.H(nu + j, nu + j) = 2.0 * c;
    qp.f[nu + j] = -2.0 * c * in.epsilon;
    out.constant += c * in.epsilon * in.epsilon;
  }

  const geom::BallFacets acc = facets_for(in, in.limits.a_max);
  const geom::BallFacets vel = facets_for(in, in.limits.v_max);
  const std::vector<Point> acc_rows = scaled_facets(in.limits.theta_a_or_identity(d), acc);
  const std::vector<Point> vel_rows = scaled_facets(in.limits.theta_v_or_identity(d), vel);

  std::size_t rows = static_cast<std::size_t>(K) * (acc_rows.size() + vel_rows.size()) +
                     static_cast<std::size_t>(m) * static_cast<std::size_t>(K) + in.corridor.plane_count();
  qp.A_ineq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), n);
  qp.b_ineq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;

  for (int k = 0; k < K; ++k) {
    for (const auto& a : acc_rows) {
      qp.A_ineq.block(r, k * d, 1, d) = -a.transpose();
      qp.b_ineq[r++] = -acc.offset;
    }
  }
  for (int k = 1; k <= K; ++k) {
    for (const auto& a : vel_rows) {
      qp.A_ineq.row(r).head(nu) = -a.transpose() * V(k);
      qp.b_ineq[r++] = -vel.offset + a.dot(c_v(k));
    }
  }
  auto add_plane = [&](int k, const geom::HalfSpace& hs, double extra) {
    qp.A_ineq.row(r).head(nu) = hs.normal.transpose() * P(k);
    qp.b_ineq[r++] = hs.offset + extra - hs.normal.dot(c_p(k));
  };
  for (int j = 0; j < m; ++j) {
    const auto& c = in.inter[static_cast<std::size_t>(j)];
    for (int k = 1; k < K; ++k) add_plane(k, c.hard[static_cast<std::size_t>(k - 1)], 0.0);
    qp.A_ineq(r, nu + j) = -1.0;
    add_plane(K, c.terminal, 0.0);
  }
  for (std::size_t k = 1; k <= in.corridor.horizon(); ++k) {
    for (const auto& hs : in.corridor.planes[k - 1]) add_plane(static_cast<int>(k), hs, 0.0);
  }

  qp.A_eq = Eigen::MatrixXd::Zero(d, n);
  qp.A_eq.leftCols(nu) = V(K);
  qp.b_eq = -c_v(K);

  qp::Box box{Eigen::VectorXd::Constant(n, -kInf), Eigen::VectorXd::Constant(n, kInf)};
  box.lower.tail(m).setZero();
  box.upper.tail(m).setConstant(in.epsilon);
  qp.bounds = std::move(box);
  return out;
}

dyn::Trajectory shifted_trajectory(const dyn::State& x0, const std::optional<dyn::Trajectory>& previous, int K,
                                   double h) {
  PointList inputs(static_cast<std::size_t>(K), Point::Zero(x0.p.size()));
  if (previous) {
    if (previous->inputs.size() != static_cast<std::size_t>(K)) {
      throw std::invalid_argument("shifted_trajectory: previous plan has the wrong horizon");
    }
    std::copy(previous->inputs.begin() + 1, previous->inputs.end(), inputs.begin());
  }
  return dyn::rollout(x0, inputs, h);
}

std::vector<double> band_headroom(const PlanInputs& in, const dyn::Trajectory& traj) {
  std::vector<double> w;
  w.reserve(in.inter.size());
  const Point& pK = traj.states.back().p;
  for (const auto& c : in.inter) w.push_back(std::clamp(c.terminal.slack(pK), 0.0, in.epsilon));
  return w;
}

double constraint_violation(const PlanInputs& in, const dyn::Trajectory& traj, const std::vector<double>& w) {
  const int d = in.dim();
  const auto K = static_cast<std::size_t>(in.limits.K);
  if (traj.states.size() != K || traj.inputs.size() != K || w.size() != in.inter.size()) {
    throw std::invalid_argument("constraint_violation: size mismatch");
  }
  double worst = 0.0;
  auto note = [&](double v) { worst = std::max(worst, v); };

  // The trajectory must actually follow the dynamics from x0.
  dyn::State x = in.x0;
  for (std::size_t k = 0; k < K; ++k) {
    x = dyn::step(x, traj.inputs[k], in.limits.h);
    note((x.p - traj.states[k].p).cwiseAbs().maxCoeff());
    note((x.v - traj.states[k].v).cwiseAbs().maxCoeff());
  }

  const geom::BallFacets acc = facets_for(in, in.limits.a_max);
  const geom::BallFacets vel = facets_for(in, in.limits.v_max);
  const Eigen::MatrixXd ta = in.limits.theta_a_or_identity(d);
  const Eigen::MatrixXd tv = in.limits.theta_v_or_identity(d);
  for (std::size_t k = 0; k < K; ++k) {
    const Point au = ta * traj.inputs[k];
    const Point bv = tv * traj.states[k].v;
    for (const auto& nrm : acc.normals) note(nrm.dot(au) - acc.offset);
    for (const auto& nrm : vel.normals) note(nrm.dot(bv) - vel.offset);
  }
  note(traj.states.back().v.cwiseAbs().maxCoeff());

  for (std::size_t j = 0; j < in.inter.size(); ++j) {
    const auto& c = in.inter[j];
    for (std::size_t k = 1; k < K; ++k) note(-c.hard[k - 1].slack(traj.states[k - 1].p));
    note(-(c.terminal.slack(traj.states.back().p) - w[j]));
    note(-w[j]);
    note(w[j] - in.epsilon);
  }
  for (std::size_t k = 1; k <= in.corridor.horizon(); ++k) {
    for (const auto& hs : in.corridor.planes[k - 1]) note(-hs.slack(traj.states[k - 1].p));
  }
  return worst;
}

double evaluate_cost(const PlanInputs& in, const dyn::Trajectory& traj, const std::vector<double>& w) {
  const auto K = static_cast<std::size_t>(in.limits.K);
  double cost = 0.5 * in.weights.terminal * (traj.states.back().p - in.tractive).squaredNorm();
  for (std::size_t k = 1; k < K; ++k) {
    cost += 0.5 * in.weights.smooth[k - 1] * (traj.states[k].p - traj.states[k - 1].p).squaredNorm();
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    cost += in.band_coefficients[j] * (in.epsilon - w[j]) * (in.epsilon - w[j]);
  }
  return cost;
}

PointList make_predetermined(const dyn::Trajectory& planned) {
  PointList pred;
  pred.reserve(planned.states.size());
  for (std::size_t k = 1; k < planned.states.size(); ++k) pred.push_back(planned.states[k].p);
  if (!planned.states.empty()) pred.push_back(planned.states.back().p);
  return pred;
}

PlanResult solve_replan(const PlanInputs& in, const std::optional<dyn::Trajectory>& previous,
                        const qp::SolverOptions& options) {
  const Assembled prog = assemble(in);
  const int d = in.dim();
  const int K = in.limits.K;
  const qp::QpSolution sol = qp::solve_qp(prog.qp, options);

  auto package = [&](dyn::Trajectory traj, const std::vector<double>& w, bool fallback) {
    PlanResult res;
    res.trajectory = std::move(traj);
    for (std::size_t j = 0; j < w.size(); ++j) res.w[in.inter[j].neighbor] = w[j];
    res.solver_status = sol.status;
    res.used_fallback = fallback;
    res.cost = evaluate_cost(in, res.trajectory, w);
    res.max_violation = constraint_violation(in, res.trajectory, w);
    res.iterations = sol.iterations;
    return res;
  };

  if (sol.status == qp::QpStatus::optimal) {
    PointList inputs;
    inputs.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) inputs.push_back(sol.z.segment(k * d, d));
    std::vector<double> w(in.inter.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      w[j] = std::clamp(sol.z[K * d + static_cast<Eigen::Index>(j)], 0.0, in.epsilon);
    }
    PlanResult res = package(dyn::rollout(in.x0, inputs, in.limits.h), w, false);
    if (res.max_violation <= kAuditTol) return res;
  }

  dyn::Trajectory shifted = shifted_trajectory(in.x0, previous, K, in.limits.h);
  const std::vector<double> w = band_headroom(in, shifted);
  PlanResult res = package(std::move(shifted), w, true);
  if (res.max_violation > kAuditTol) {
    std::ostringstream msg;
    msg << "shifted solution violates the round's constraints by " << res.max_violation
        << " (solver status " << qp::to_string(sol.status) << ", " << sol.iterations << " iterations, "
        << in.inter.size() << " neighbours, " << in.corridor.plane_count() << " corridor planes, x0 = ["
        << in.x0.p.transpose() << "], v0 = [" << in.x0.v.transpose() << "])";
    throw InvariantBreach(msg.str());
  }
  return res;
}

}  // namespace swarm::mpc
