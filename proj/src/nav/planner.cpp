#include "wildfusion/nav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace wf {

namespace {

struct OpenEntry {
  double f = 0.0;
  double h = 0.0;
  std::size_t index = 0;

  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return index > o.index;
  }
};

}  // namespace

std::optional<Path> a_star(const Costmap& map, GridCell start, GridCell goal) {
  const MapSpec& spec = map.spec;
  spec.check();
  if (!spec.contains(start.x, start.y) || !spec.contains(goal.x, goal.y))
    throw InputError("path endpoint outside the map");
  if (!std::isfinite(map.cost(start.y, start.x)) ||
      !std::isfinite(map.cost(goal.y, goal.x)))
    throw InputError("path endpoint on an impassable cell");

  double min_cost = kImpassable;
  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix)
      if (std::isfinite(map.cost(iy, ix)))
        min_cost = std::min(min_cost, map.cost(iy, ix));

  auto heuristic = [&](int ix, int iy) {
    return std::hypot(double(ix - goal.x), double(iy - goal.y)) * min_cost;
  };

  const std::size_t n = std::size_t(spec.width) * std::size_t(spec.height);
  std::vector<double> g(n, kImpassable);
  std::vector<int> parent(n, -1);
  std::vector<bool> closed(n, false);

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  const std::size_t start_idx = spec.index(start.x, start.y);
  g[start_idx] = 0.0;
  open.push({heuristic(start.x, start.y), heuristic(start.x, start.y),
             start_idx});

  const std::size_t goal_idx = spec.index(goal.x, goal.y);
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.index]) continue;
    closed[top.index] = true;
    if (top.index == goal_idx) break;

    const int cx = int(top.index % std::size_t(spec.width));
    const int cy = int(top.index / std::size_t(spec.width));
    const double c_from = map.cost(cy, cx);

    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (!spec.contains(nx, ny)) continue;
        const double c_to = map.cost(ny, nx);
        if (!std::isfinite(c_to)) continue;
        const std::size_t ni = spec.index(nx, ny);
        if (closed[ni]) continue;
        const double len = (dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0;
        const double cand = g[top.index] + len * 0.5 * (c_from + c_to);
        if (cand < g[ni]) {
          g[ni] = cand;
          parent[ni] = int(top.index);
          const double h = heuristic(nx, ny);
          open.push({cand + h, h, ni});
        }
      }
  }

  if (!closed[goal_idx]) return std::nullopt;

  Path path;
  path.total_cost = g[goal_idx];
  for (int at = int(goal_idx); at >= 0; at = parent[std::size_t(at)]) {
    path.cells.push_back({int(std::size_t(at) % std::size_t(spec.width)),
                          int(std::size_t(at) / std::size_t(spec.width))});
    if (std::size_t(at) == start_idx) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

}  // namespace wf
