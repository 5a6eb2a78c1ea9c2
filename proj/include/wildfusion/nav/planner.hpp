#pragma once

#include <optional>
#include <vector>

#include "wildfusion/nav/costmap.hpp"

namespace wf {

struct GridCell {
  int x = 0;
  int y = 0;

  bool operator==(const GridCell&) const = default;
};

struct Path {
  std::vector<GridCell> cells;  // consecutive entries are 8-adjacent
  double total_cost = 0.0;      // sum of step costs
};

/// Cost-optimal 8-connected A*. A step of length L cells (1 or √2) costs
/// L·(cost(from)+cost(to))/2; the heuristic is the Euclidean cell distance
/// times the cheapest finite cell, which never overestimates. Ties break on
/// (f, h, row-major index), so equal-cost queries reproduce exactly.
/// Returns nullopt when the goal is unreachable; throws when an endpoint is
/// outside the grid or impassable.
std::optional<Path> a_star(const Costmap& map, GridCell start, GridCell goal);

}  // namespace wf
