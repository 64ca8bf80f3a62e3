#pragma once

#include "swarm/geometry.hpp"

namespace swarm::geom::detail {

/// GJK distance between conv(a) and conv(b); works in any dimension.
double gjk_distance(std::span<const Point> a, std::span<const Point> b);

/// Edge-pair distance between two 2D hulls already in counterclockwise order.
double polygon_distance_2d(const PointList& ha, const PointList& hb);

}  // namespace swarm::geom::detail
