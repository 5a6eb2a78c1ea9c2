#include "wildfusion/label/surface_index.hpp"

#include <algorithm>
#include <limits>

#include "wildfusion/core/error.hpp"

namespace wf {

SurfaceIndex::SurfaceIndex(const PointCloud& cloud, int leaf_size)
    : points_(cloud.points), leaf_size_(std::max(1, leaf_size)) {
  if (points_.empty())
    throw InputError("surface index needs a nonempty cloud");
  nodes_.reserve(2 * points_.size() / static_cast<std::size_t>(leaf_size_) +
                 4);
  build(0, static_cast<int>(points_.size()));
}

int SurfaceIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});

  if (end - begin <= leaf_size_) return id;

  // Split on the axis of largest extent at the median point.
  Vec3 lo = points_[static_cast<std::size_t>(begin)].position;
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[static_cast<std::size_t>(i)].position);
    hi = hi.cwiseMax(points_[static_cast<std::size_t>(i)].position);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid,
                   points_.begin() + end,
                   [axis](const SurfacePoint& a, const SurfacePoint& b) {
                     return a.position[axis] < b.position[axis];
                   });

  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split =
      points_[static_cast<std::size_t>(mid)].position[axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void SurfaceIndex::search(int node, const Vec3& q, Result& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const double d =
          (points_[static_cast<std::size_t>(i)].position - q).norm();
      if (d < best.distance) best = {i, d};
    }
    return;
  }
  const double delta = q[n.axis] - n.split;
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, q, best);
  if (std::abs(delta) < best.distance) search(far, q, best);
}

SurfaceIndex::Result SurfaceIndex::nearest(const Vec3& query) const {
  Result best{-1, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace wf
