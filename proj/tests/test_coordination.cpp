#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "swarm/coordination.hpp"

using namespace swarm;
using namespace swarm::coord;
using test::pt;

TEST_SUITE("coordination") {

TEST_CASE("extended minimum distance") {
  CHECK(extended_min_distance(0.6, 0.2, 3.0) == doctest::Approx(std::sqrt(0.72)));
  CHECK(extended_min_distance(0.6, 0.2, 3.0) == doctest::Approx(0.848528).epsilon(1e-6));
}

TEST_CASE("MBVC plane between two robots on the x axis") {
  const double rp = extended_min_distance(0.6, 0.2, 3.0);
  const HalfSpace hi = mbvc_halfspace(pt(1, 0), pt(-1, 0), rp);
  CHECK(hi.normal.isApprox(pt(1, 0)));
  CHECK(hi.offset == doctest::Approx(0.42426).epsilon(1e-5));
  const HalfSpace hj = mbvc_halfspace(pt(-1, 0), pt(1, 0), rp);
  CHECK(hj.normal.isApprox(-hi.normal));
  CHECK(hj.offset == doctest::Approx(hi.offset));
}

TEST_CASE("mirror planes together imply r' separation") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  const double rp = 0.85;
  for (int trial = 0; trial < 200; ++trial) {
    const Point a = pt(u(rng), u(rng)), b = pt(u(rng), u(rng));
    const HalfSpace ha = mbvc_halfspace(a, b, rp);
    const HalfSpace hb = mbvc_halfspace(b, a, rp);
    // Any pair satisfying both planes is r' apart: adding the inequalities gives
    // n·(x - y) >= r' with a unit n.
    const Point x = pt(u(rng), u(rng)), y = pt(u(rng), u(rng));
    if (ha.satisfied(x) && hb.satisfied(y)) CHECK((x - y).norm() >= rp - 1e-12);
    CHECK(ha.offset + hb.offset == doctest::Approx(rp));
  }
}

TEST_CASE("predetermined pair exactly r' apart has zero slack") {
  const double rp = 0.85;
  const Point a = pt(0.3, 0.1), b = a + rp * pt(0.6, 0.8);
  CHECK(std::abs(mbvc_halfspace(a, b, rp).slack(a)) < 1e-12);
  CHECK(std::abs(mbvc_halfspace(b, a, rp).slack(b)) < 1e-12);
}

TEST_CASE("ellipsoid mode compresses vertical separation") {
  Eigen::MatrixXd E = Eigen::Vector3d(1.0, 1.0, 0.24 / 0.6).asDiagonal();
  const double rp = 0.3;
  const Point lo = pt(0, 0, 0), hi = pt(0, 0, 1);
  const HalfSpace h = mbvc_halfspace(hi, lo, rp, E);
  CHECK(h.normal.isApprox(pt(0, 0, 1)));
  // Scaled gap 0.4, plane at the scaled midpoint plus r'/2, mapped back to z.
  CHECK(h.offset == doctest::Approx((0.4 * 0.5 + rp / 2) / 0.4));

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const Point a = pt(u(rng), u(rng), u(rng)), b = pt(u(rng), u(rng), u(rng));
    const HalfSpace ha = mbvc_halfspace(a, b, rp, E), hb = mbvc_halfspace(b, a, rp, E);
    const Point x = pt(u(rng), u(rng), u(rng)), y = pt(u(rng), u(rng), u(rng));
    if (ha.satisfied(x) && hb.satisfied(y)) CHECK((E * (x - y)).norm() >= rp - 1e-12);
  }
}

TEST_CASE("coincident points are an error") {
  CHECK_THROWS_AS(mbvc_halfspace(pt(1, 1), pt(1, 1), 0.8), CoincidentRobots);
}

TEST_CASE("interrobot constraint counts") {
  const PointList own{pt(0, 0), pt(0.1, 0), pt(0.2, 0)};
  SUBCASE("two robots, K = 3") {
    const std::vector<NeighborPrediction> nb{{1, {pt(3, 0), pt(2.9, 0), pt(2.8, 0)}}};
    const auto cs = interrobot_constraints(own, nb, 0.85);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].neighbor == 1);
    CHECK(cs[0].hard.size() == 2);
  }
  SUBCASE("four robots") {
    std::vector<NeighborPrediction> nb;
    for (std::size_t j = 1; j <= 3; ++j) nb.push_back({j, PointList(3, pt(3.0 * j, 1))});
    CHECK(interrobot_constraints(own, nb, 0.85).size() == 3);
  }
  SUBCASE("horizon mismatch") {
    const std::vector<NeighborPrediction> nb{{1, {pt(3, 0)}}};
    CHECK_THROWS_AS(interrobot_constraints(own, nb, 0.85), std::invalid_argument);
  }
}

TEST_CASE("warning band coefficient") {
  const double rho0 = 1.0, eps = 0.12;
  CHECK(warning_band_coefficient(eps, rho0, eps) == doctest::Approx(rho0 / (eps * eps)));
  CHECK(warning_band_coefficient(eps / 2, rho0, eps) == doctest::Approx(2.0 * rho0 / (eps * eps)));
  // eps = 0.1, beta = 0.5, previous w = 0, previous gamma = 0.1: gamma becomes 0.05.
  const double g = update_gamma(0.1, 0.0, 0.5, 0.1);
  CHECK(g == doctest::Approx(0.05));
  CHECK(warning_band_coefficient(g, 3.0, 0.1) == doctest::Approx(200.0 * 3.0));
  CHECK_THROWS_AS(warning_band_coefficient(0.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("gamma recursion") {
  CHECK(update_gamma(0.07, 0.07, 0.3, 0.12) == doctest::Approx(0.07));
  double g = 0.01;
  for (int i = 0; i < 200; ++i) g = update_gamma(g, 0.12, 0.3, 0.12);
  CHECK(g == doctest::Approx(0.12));
  g = 0.12;
  for (int i = 0; i < 500; ++i) {
    g = update_gamma(g, 0.0, 0.3, 0.12);
    CHECK(g >= 1e-6 * 0.12);
    CHECK(g <= 0.12);
  }
}

TEST_CASE("terminal overlap detection") {
  const Point target = pt(5, 0);
  SUBCASE("parked at the target") {
    const PointList plan(4, target);
    CHECK_FALSE(detect_terminal_overlap(plan, plan, target));
  }
  SUBCASE("frozen away from the target") {
    const PointList plan(4, pt(1, 1));
    CHECK(detect_terminal_overlap(plan, plan, target));
  }
  SUBCASE("terminal point drifting by twice the tolerance") {
    const double tol = 1e-3;
    const PointList prev(4, pt(1, 1));
    const PointList now(4, pt(1 + 2 * tol, 1));
    CHECK_FALSE(detect_terminal_overlap(now, prev, target, tol));
  }
  SUBCASE("still moving inside the horizon") {
    const PointList plan{pt(0, 1), pt(0.5, 1), pt(1, 1)};
    CHECK_FALSE(detect_terminal_overlap(plan, plan, target));
  }
}

TEST_CASE("right-hand rule escalation") {
  CHECK(update_eta(0.0, true, false, 0.5) == doctest::Approx(0.5));
  CHECK(update_eta(2.0, false, true, 0.5) == 0.0);
  CHECK(update_eta(1.5, false, false, 0.5) == 1.5);
  // b_TO has priority when both hold.
  CHECK(update_eta(1.0, true, true, 0.5) == doctest::Approx(1.5));
  CHECK(update_eta(5.8, true, false, 0.5, 6.0) == doctest::Approx(6.0));
}

TEST_CASE("rho and the bearing angle") {
  const double rho0 = 10.0;
  CHECK(rho(rho0, 0.0, 1.234) == doctest::Approx(rho0));
  CHECK(rho(rho0, 1.0, std::numbers::pi / 2) == doctest::Approx(rho0 * std::numbers::e));
  CHECK(rho(rho0, 1.0, -std::numbers::pi / 2) == doctest::Approx(rho0 / std::numbers::e));

  // Goal straight ahead (+x), neighbour on the left (+y): +90 degrees.
  CHECK(bearing_angle(pt(0, 0), pt(5, 0), pt(0, 1)) == doctest::Approx(std::numbers::pi / 2));
  CHECK(bearing_angle(pt(0, 0), pt(5, 0), pt(0, -1)) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(bearing_angle(pt(0, 0), pt(5, 0), pt(-1, 0)) == doctest::Approx(std::numbers::pi));
  CHECK(bearing_angle(pt(0, 0), pt(0, 0), pt(1, 1)) == 0.0);
  // 3D uses the x-y projection; vertical neighbours fall back to zero.
  CHECK(bearing_angle(pt(0, 0, 0), pt(1, 0, 0), pt(0, 0, 2)) == 0.0);
  CHECK(bearing_angle(pt(0, 0, 1), pt(1, 0, 0), pt(0, 1, 3)) == doctest::Approx(std::numbers::pi / 2));

  // Uniform scaling leaves the angle unchanged.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 50; ++i) {
    const Point a = pt(u(rng), u(rng)), t = pt(u(rng), u(rng)), n = pt(u(rng), u(rng));
    CHECK(bearing_angle(2.7 * a, 2.7 * t, 2.7 * n) == doctest::Approx(bearing_angle(a, t, n)));
  }
}

TEST_CASE("initial runtime") {
  const std::vector<std::size_t> nb{1, 2};
  const RobotRuntime rt = RobotRuntime::initial(pt(1, 2), pt(5, 5), 12, nb, 0.12);
  CHECK(rt.pred.size() == 12);
  for (const auto& p : rt.pred) CHECK(p == pt(1, 2));
  CHECK(rt.gamma.at(1) == 0.12);
  CHECK(rt.gamma.at(2) == 0.12);
  CHECK(rt.eta == 0.0);
  CHECK_FALSE(rt.b_to);
}

TEST_CASE("parameter validation") {
  InterRobotParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.overlap_tol = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}  // TEST_SUITE
