#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "swarm/qp.hpp"

using namespace swarm;
using namespace swarm::qp;
using test::pt;

namespace {

QuadraticProgram one_d(double h, double f) {
  auto qp = QuadraticProgram::with_variables(1);
  qp.H(0, 0) = h;
  qp.f[0] = f;
  return qp;
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("single active lower bound: min (z-1)^2 s.t. z >= 2") {
  auto qp = one_d(2.0, -2.0);
  qp.A_ineq = Eigen::MatrixXd::Ones(1, 1);
  qp.b_ineq = Eigen::VectorXd::Constant(1, 2.0);
  const QpSolution s = solve_qp(qp);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.z[0] == doctest::Approx(2.0));
  CHECK(s.lambda_ineq[0] == doctest::Approx(2.0));
}

TEST_CASE("unconstrained minimum of |z|^2 is the origin") {
  auto qp = QuadraticProgram::with_variables(3);
  qp.H.setIdentity();
  const QpSolution s = solve_qp(qp);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.z.norm() < 1e-12);
}

TEST_CASE("min z1^2 + z2^2 s.t. z1 + z2 >= 2") {
  auto qp = QuadraticProgram::with_variables(2);
  qp.H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  qp.A_ineq = Eigen::MatrixXd::Ones(1, 2);
  qp.b_ineq = Eigen::VectorXd::Constant(1, 2.0);
  const QpSolution s = solve_qp(qp);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.z[0] == doctest::Approx(1.0));
  CHECK(s.z[1] == doctest::Approx(1.0));
  CHECK(s.kkt_residual <= 1e-9);
}

TEST_CASE("equalities and box sides") {
  auto qp = QuadraticProgram::with_variables(2);
  qp.H.setIdentity();
  qp.f << -5.0, -5.0;
  qp.A_eq = Eigen::MatrixXd(1, 2);
  qp.A_eq << 1.0, -1.0;
  qp.b_eq = Eigen::VectorXd::Constant(1, 1.0);  // z1 = z2 + 1
  qp.bounds = Box{Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 2.0)};
  const QpSolution s = solve_qp(qp);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.z[0] == doctest::Approx(2.0));
  CHECK(s.z[1] == doctest::Approx(1.0));
  CHECK(s.lambda_upper[0] > 0.0);
  CHECK(max_violation(qp, s.z) < 1e-12);
}

TEST_CASE("semidefinite H with a bounded feasible set") {
  // Linear program in disguise: min -z1 over the unit box.
  auto qp = QuadraticProgram::with_variables(2);
  qp.f << -1.0, 0.0;
  qp.bounds = Box{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  const QpSolution s = solve_qp(qp);
  REQUIRE(s.status == QpStatus::optimal);
  CHECK(s.z[0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible rows are reported as infeasible") {
  auto qp = one_d(1.0, 0.0);
  qp.A_ineq = Eigen::MatrixXd(2, 1);
  qp.A_ineq << 1.0, -1.0;
  qp.b_ineq.resize(2);
  qp.b_ineq << 1.0, 0.0;  // z >= 1 and z <= 0
  CHECK(solve_qp(qp).status == QpStatus::infeasible);
}

TEST_CASE("iteration cap is surfaced distinctly") {
  std::mt19937_64 rng(1);
  const QuadraticProgram qp = test::random_qp(rng, 6, 12, true);
  SolverOptions opt;
  opt.max_iter = 1;
  const QpSolution s = solve_qp(qp, opt);
  // Either solved in one step or capped; never a spurious infeasibility verdict.
  CHECK(s.status != QpStatus::infeasible);
}

TEST_CASE("input validation") {
  auto qp = QuadraticProgram::with_variables(2);
  qp.H = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_qp(qp), std::invalid_argument);
  auto neg = one_d(-1.0, 0.0);
  CHECK_THROWS_AS(solve_qp(neg), std::invalid_argument);
}

TEST_CASE("random QPs agree with the projected-gradient oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const QuadraticProgram qp = test::random_qp(rng, 4, 6, trial % 2 == 0);
    const QpSolution s = solve_qp(qp);
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.kkt_residual <= 1e-6);
    CHECK(max_violation(qp, s.z) <= 1e-9);
    const Eigen::VectorXd z = test::projected_gradient_oracle(qp);
    CHECK(qp.objective(s.z) == doctest::Approx(qp.objective(z)).epsilon(1e-6));
    CHECK(qp.objective(s.z) <= qp.objective(z) + 1e-6);
  }
}

TEST_CASE("separating plane: point sets beside a unit square") {
  const geom::ConvexObstacle obs(test::square(0, 0, 1));
  const geom::PointList free{pt(2, 0), pt(2, 1)};
  const SeparatingPlane sp = separating_plane(free, obs);
  CHECK(sp.plane.normal.isApprox(pt(1, 0), 1e-9));
  CHECK(sp.plane.offset == doctest::Approx(1.0));
  CHECK(sp.margin == doctest::Approx(1.0));
  CHECK(sp.margin == doctest::Approx(geom::hull_distance(free, obs.vertices())));
}

TEST_CASE("separating plane: symmetric two-point case") {
  const geom::ConvexObstacle obs(geom::PointList{pt(-1, 0), pt(-2, -1), pt(-2, 1)});
  const geom::PointList free{pt(1, 0)};
  const SeparatingPlane sp = separating_plane(free, obs);
  CHECK(sp.plane.normal.isApprox(pt(1, 0), 1e-9));
  CHECK(sp.plane.offset == doctest::Approx(-1.0));
  CHECK(sp.margin == doctest::Approx(2.0));
}

TEST_CASE("separating plane: translated copy at distance D") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const geom::PointList poly = test::random_polygon(rng, pt(0, 0), 1.0);
    const geom::ConvexObstacle obs(poly);
    const geom::Point shift = test::random_offset(rng, 3.0, 6.0);
    geom::PointList free;
    for (const auto& v : poly) free.push_back(v + shift);
    const SeparatingPlane sp = separating_plane(free, obs);
    CHECK(sp.margin == doctest::Approx(geom::hull_distance(free, poly)).epsilon(1e-9));
    for (const auto& p : free) CHECK(sp.plane.slack(p) >= sp.margin - 1e-9);
    for (const auto& p : poly) CHECK(sp.plane.slack(p) <= 1e-9);
  }
}

TEST_CASE("separating plane scales with its inputs") {
  const geom::PointList poly{pt(0, 0), pt(1, 0.2), pt(0.4, 1)};
  const geom::PointList free{pt(2, 2), pt(3, 1.5)};
  const SeparatingPlane a = separating_plane(free, geom::ConvexObstacle(poly));
  geom::PointList poly2, free2;
  for (const auto& p : poly) poly2.push_back(2.5 * p);
  for (const auto& p : free) free2.push_back(2.5 * p);
  const SeparatingPlane b = separating_plane(free2, geom::ConvexObstacle(poly2));
  CHECK(b.plane.normal.isApprox(a.plane.normal, 1e-9));
  CHECK(b.plane.offset == doctest::Approx(2.5 * a.plane.offset));
  CHECK(b.margin == doctest::Approx(2.5 * a.margin));
}

TEST_CASE("separating plane rejects overlapping sets") {
  const geom::ConvexObstacle obs(test::square(0, 0, 1));
  const geom::PointList inside{pt(0.5, 0.5), pt(3, 3)};
  CHECK_THROWS_AS(separating_plane(inside, obs), std::invalid_argument);
}

}  // TEST_SUITE
