#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "uavgeo/geometry.h"

namespace uavgeo {

enum class DistanceMetric { kL1, kL2 };

// |dx| + |dy| + |dz|, summed in that order.
inline double L1Distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::abs(a.x() - b.x()) + std::abs(a.y() - b.y()) +
         std::abs(a.z() - b.z());
}

struct Neighbor {
  size_t index = 0;
  // L1 distance or Euclidean (not squared) distance, per the query metric.
  double distance = 0.0;
};

// Static 3D k-d tree. Built once; queries are const and safe to run from
// multiple threads. Ties resolve to the lowest point index so results match
// an exhaustive scan exactly.
class KdTree {
 public:
  explicit KdTree(PointCloud points);

  size_t Size() const { return points_.size(); }
  const PointCloud& Points() const { return points_; }

  // Requires a non-empty tree.
  Neighbor Nearest(const Eigen::Vector3d& query,
                   DistanceMetric metric = DistanceMetric::kL2) const;

 private:
  struct Node {
    // Leaf when axis < 0; then [begin, end) indexes order_.
    int axis = -1;
    double split = 0.0;
    uint32_t begin = 0;
    uint32_t end = 0;
    uint32_t left = 0;
    uint32_t right = 0;
  };

  uint32_t Build(uint32_t begin, uint32_t end);
  void Search(uint32_t node, const Eigen::Vector3d& query,
              DistanceMetric metric, Neighbor* best, double* best_key) const;

  PointCloud points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace uavgeo
