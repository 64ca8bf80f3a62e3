#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/coordination.hpp"
#include "swarm/corridor.hpp"
#include "swarm/dynamics.hpp"
#include "swarm/qp.hpp"

namespace swarm::mpc {

using geom::Point;
using geom::PointList;

/// The shifted previous solution violates the new constraints, or the solver proved the
/// program infeasible and the shifted solution confirms it. Either means a broken invariant.
class InvariantBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CostWeights {
  std::vector<double> smooth;  ///< Q_k for k = 1..K-1, weighting |p_{k+1} - p_k|^2
  double terminal = 10.0;      ///< Q_K, weighting |p_K - tractive|^2

  static CostWeights uniform(int K, double q_smooth = 1.0, double q_terminal = 10.0);
  void validate(int K) const;
};

/// Everything one robot needs to build its program for one round.
struct PlanInputs {
  dyn::State x0;
  dyn::Limits limits;
  CostWeights weights;
  Point tractive;
  corridor::Corridor corridor;                   ///< may be empty (no obstacle planes)
  std::vector<coord::NeighborConstraints> inter;
  std::vector<double> band_coefficients;        ///< rho / (epsilon gamma), parallel to `inter`
  double epsilon = 0.12;

  int dim() const { return static_cast<int>(x0.p.size()); }
};

/// Program over z = [u_0; ...; u_{K-1}; w_1; ...; w_m]. `constant` is the part of the cost
/// that does not depend on z, so objective(z) + constant is the full cost.
struct Assembled {
  qp::QuadraticProgram qp;
  double constant = 0.0;
};

Assembled assemble(const PlanInputs& in);

struct PlanResult {
  dyn::Trajectory trajectory;
  std::map<std::size_t, double> w;
  qp::QpStatus solver_status = qp::QpStatus::optimal;
  bool used_fallback = false;
  double cost = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
};

/// Tolerance of the independent constraint audit.
inline constexpr double kAuditTol = 1e-6;

/// Solves the round's program. On solver failure (iteration cap, a failed audit, or an
/// infeasibility report the shifted solution refutes) the shifted previous plan is used.
/// `previous` is the plan of the last round; without it the fallback holds position.
/// Throws InvariantBreach if the fallback itself violates the constraints.
PlanResult solve_replan(const PlanInputs& in, const std::optional<dyn::Trajectory>& previous,
                        const qp::SolverOptions& options = {});

/// Previous plan shifted by one step from x0 with a zero final input; a hold at x0 when
/// there is no previous plan.
dyn::Trajectory shifted_trajectory(const dyn::State& x0, const std::optional<dyn::Trajectory>& previous, int K,
                                   double h);

/// Largest feasible headroom for the given trajectory, min(epsilon, slack) clamped at 0;
/// this is also the cheapest choice since the penalty falls as w grows.
std::vector<double> band_headroom(const PlanInputs& in, const dyn::Trajectory& traj);

/// Largest violation of any constraint, evaluated directly on the trajectory.
double constraint_violation(const PlanInputs& in, const dyn::Trajectory& traj, const std::vector<double>& w);

/// Cost evaluated directly on the trajectory.
double evaluate_cost(const PlanInputs& in, const dyn::Trajectory& traj, const std::vector<double>& w);

/// [p_2, ..., p_K, p_K] from a planned trajectory.
PointList make_predetermined(const dyn::Trajectory& planned);

}  // namespace swarm::mpc
