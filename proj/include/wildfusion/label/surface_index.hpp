#pragma once

#include <vector>

#include "wildfusion/core/types.hpp"

namespace wf {

/// Balanced K-D tree over surface points. Queries are exact: the reported
/// neighbor is the true Euclidean minimum, never approximate.
class SurfaceIndex {
 public:
  static constexpr int kDefaultLeafSize = 30;

  explicit SurfaceIndex(const PointCloud& cloud,
                        int leaf_size = kDefaultLeafSize);

  struct Result {
    int index = -1;
    double distance = 0.0;
  };

  Result nearest(const Vec3& query) const;
  const SurfacePoint& point(int index) const {
    return points_[static_cast<std::size_t>(index)];
  }
  int size() const { return static_cast<int>(points_.size()); }

 private:
  struct Node {
    int begin = 0, end = 0;      // leaf range when left < 0
    int left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, Result& best) const;

  std::vector<SurfacePoint> points_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

}  // namespace wf
