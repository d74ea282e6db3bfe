#include "uavgeo/kdtree.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

constexpr uint32_t kLeafSize = 8;

}  // namespace

KdTree::KdTree(PointCloud points) : points_(std::move(points)) {
  if (points_.size() >= std::numeric_limits<uint32_t>::max()) {
    throw ValidationError("point cloud too large for the k-d tree");
  }
  order_.resize(points_.size());
  for (uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    Build(0, static_cast<uint32_t>(points_.size()));
  }
}

uint32_t KdTree::Build(uint32_t begin, uint32_t end) {
  const uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) {
    // All points coincide.
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  const uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](uint32_t a, uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  const uint32_t left = Build(begin, mid);
  const uint32_t right = Build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

Neighbor KdTree::Nearest(const Eigen::Vector3d& query,
                         DistanceMetric metric) const {
  if (points_.empty()) {
    throw InsufficientDataError("nearest-neighbor query on an empty cloud");
  }
  Neighbor best;
  best.index = std::numeric_limits<size_t>::max();
  double best_key = std::numeric_limits<double>::infinity();
  Search(0, query, metric, &best, &best_key);
  best.distance =
      metric == DistanceMetric::kL2 ? std::sqrt(best_key) : best_key;
  return best;
}

void KdTree::Search(uint32_t node_id, const Eigen::Vector3d& query,
                    DistanceMetric metric, Neighbor* best,
                    double* best_key) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (uint32_t i = node.begin; i < node.end; ++i) {
      const uint32_t idx = order_[i];
      const double key = metric == DistanceMetric::kL1
                             ? L1Distance(query, points_[idx])
                             : (query - points_[idx]).squaredNorm();
      if (key < *best_key || (key == *best_key && idx < best->index)) {
        *best_key = key;
        best->index = idx;
      }
    }
    return;
  }

  const double diff = query[node.axis] - node.split;
  const uint32_t near = diff < 0.0 ? node.left : node.right;
  const uint32_t far = diff < 0.0 ? node.right : node.left;
  Search(near, query, metric, best, best_key);
  // Lower bound on the distance to anything across the splitting plane.
  const double bound = metric == DistanceMetric::kL1 ? std::abs(diff)
                                                     : diff * diff;
  if (bound <= *best_key) {
    Search(far, query, metric, best, best_key);
  }
}

}  // namespace uavgeo
