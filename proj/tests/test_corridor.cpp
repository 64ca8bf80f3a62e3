#include <doctest.h>

#include "fuzz.hpp"
#include "support.hpp"
#include "swarm/corridor.hpp"

using namespace swarm;
using namespace swarm::corridor;
using test::pt;

namespace {

/// Reference greedy division: extend backwards from the end while the hull stays clear.
std::vector<Segment> greedy_oracle(const PointList& pts, std::span<const ConvexObstacle> obs, double clearance) {
  std::vector<Segment> out;
  std::size_t last = pts.size() - 1;
  while (true) {
    std::size_t first = last;
    while (first > 0) {
      const PointList hull(pts.begin() + static_cast<long>(first - 1), pts.begin() + static_cast<long>(last + 1));
      bool ok = true;
      for (const auto& o : obs) ok = ok && geom::hull_clear_of(hull, o, clearance - 1e-9);
      if (!ok) break;
      --first;
    }
    out.push_back({first, last});
    if (first == 0) return out;
    last = first;
  }
}

}  // namespace

TEST_SUITE("corridor") {

TEST_CASE("build_ept") {
  const PointList pred{pt(0, 0), pt(1, 0), pt(2, 0)};
  SUBCASE("terminal overlap keeps the predetermined points only") {
    const Ept e = build_ept(pred, pt(5, 0), true);
    CHECK(e.points == pred);
    CHECK_FALSE(e.has_tractive);
  }
  SUBCASE("no tractive point") {
    CHECK(build_ept(pred, std::nullopt, false).points == pred);
  }
  SUBCASE("stationary start with a visible goal") {
    const PointList still(4, pt(1, 1));
    const Ept e = build_ept(still, pt(4, 5), false);
    REQUIRE(e.points.size() == 5);
    CHECK(e.points.back() == pt(4, 5));
    CHECK(e.horizon() == 4);
  }
  SUBCASE("anchor goes first and shifts step indices") {
    const Ept e = build_ept(pred, pt(5, 0), false, pt(-1, 0));
    CHECK(e.points.front() == pt(-1, 0));
    CHECK(e.horizon() == 3);
    CHECK(e.index_of_step(1) == 1);
    CHECK(e.points[e.index_of_step(3)] == pt(2, 0));
  }
}

TEST_CASE("segment division without obstacles is one segment") {
  const Ept e = build_ept({pt(0, 0), pt(1, 0), pt(2, 1)}, pt(3, 3), false, pt(-1, 0));
  const auto segs = segment_division(e, {}, 0.3);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].first == 0);
  CHECK(segs[0].last == 4);
}

TEST_CASE("segment division around a corner matches the greedy oracle") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::rect(-1.5, 0.4, -0.4, 2.0))};
  const PointList pts{pt(-2, 0), pt(-1, 0), pt(0, 0), pt(0, 1), pt(0, 2)};
  const Ept e = build_ept(pts, std::nullopt, false);
  const auto segs = segment_division(e, obs, 0.3);
  const auto oracle = greedy_oracle(pts, obs, 0.3);
  REQUIRE(segs.size() == oracle.size());
  CHECK(segs.size() >= 2);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].first == oracle[i].first);
    CHECK(segs[i].last == oracle[i].last);
  }
  // Neighbours share exactly one index.
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) CHECK(segs[i].first == segs[i + 1].last);
}

TEST_CASE("points around a central obstacle split into pairs") {
  PointList ring;
  for (int k = 0; k < 12; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 12;
    ring.push_back(pt(std::cos(a), std::sin(a)));
  }
  const std::vector<ConvexObstacle> obs{ConvexObstacle(ring)};
  PointList pts;
  for (int k = 0; k < 6; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 6;
    pts.push_back(1.6 * pt(std::cos(a), std::sin(a)));
  }
  const auto segs = segment_division(build_ept(pts, std::nullopt, false), obs, 0.3);
  CHECK(segs.size() == 5);
  for (const auto& s : segs) CHECK(s.size() == 2);
}

TEST_CASE("segment division rejects a blocked step") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::rect(-0.2, -1, 0.2, 1))};
  CHECK_THROWS_AS(segment_division(build_ept({pt(-1, 0), pt(1, 0)}, std::nullopt, false), obs, 0.3), CorridorError);
}

TEST_CASE("corridor without obstacles is empty") {
  const Ept e = build_ept({pt(0, 0), pt(1, 0)}, pt(2, 0), false);
  const auto segs = segment_division(e, {}, 0.3);
  const Corridor c = build_corridor(segs, e, {}, 0.3, pt(0, 0), {7.2});
  CHECK(c.horizon() == 2);
  CHECK(c.plane_count() == 0);
  CHECK(std::isinf(c.min_slack(PointList{pt(0, 0), pt(1, 0)})));
}

TEST_CASE("obstacles beyond the reach are ignored") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::square(20, 0, 1))};
  const Ept e = build_ept({pt(0, 0), pt(1, 0)}, pt(2, 0), false);
  const auto segs = segment_division(e, obs, 0.3);
  CHECK(build_corridor(segs, e, obs, 0.3, pt(0, 0), {7.2}).plane_count() == 0);
}

TEST_CASE("L-passage corridor: shared indices carry planes of both segments") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::rect(0.8, -1, 4, 2.2)),
                                        ConvexObstacle(test::rect(-1.8, -1, -0.8, 4.8)),
                                        ConvexObstacle(test::rect(-0.8, 3.8, 4, 4.8))};
  const PointList pred{pt(0, 1), pt(0, 2), pt(0, 3), pt(1, 3), pt(2, 3)};
  const Ept e = build_ept(pred, pt(3, 3), false, pt(0, 0));
  const double clearance = 0.31;
  const auto segs = segment_division(e, obs, clearance);
  REQUIRE(segs.size() >= 2);
  const Corridor c = build_corridor(segs, e, obs, clearance, pt(0, 0), {7.2});
  CHECK(c.min_slack(pred) >= -1e-9);

  // Planes emitted per segment, found by building a corridor for each segment alone.
  bool found_shared = false;
  for (std::size_t k = 1; k <= pred.size(); ++k) {
    std::size_t expected = 0;
    int owners = 0;
    for (const auto& s : segs) {
      if (!s.contains(e.index_of_step(k))) continue;
      ++owners;
      const std::vector<Segment> one{s};
      const Corridor alone = build_corridor(one, e, obs, clearance, pt(0, 0), {7.2});
      expected += alone.planes[k - 1].size();
    }
    CHECK(c.planes[k - 1].size() == expected);
    found_shared = found_shared || owners == 2;
  }
  CHECK(found_shared);

  // Straight lines between consecutive predetermined points stay clear.
  for (std::size_t k = 0; k + 1 < pred.size(); ++k) {
    for (int s = 0; s <= 100; ++s) {
      const Point x = pred[k] + (pred[k + 1] - pred[k]) * (s / 100.0);
      CHECK(geom::clearance_of(x, obs) >= clearance - 1e-9);
    }
  }
}

TEST_CASE("corridor properties on random walks") {
  const test::CorridorFuzzResult r = test::corridor_fuzz(17, 60, 20);
  CHECK(r.trials == 60);
  CHECK_MESSAGE(r.corridor_failures == 0, r.first_failure);
  CHECK(r.worst_own_slack >= -1e-9);
  CHECK(r.worst_clearance >= 0.31 - 1e-6);
}

}  // TEST_SUITE
