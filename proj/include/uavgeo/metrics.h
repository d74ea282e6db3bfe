#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavgeo/alignment.h"
#include "uavgeo/geometry.h"
#include "uavgeo/image.h"
#include "uavgeo/kdtree.h"

namespace uavgeo {

// One view of a paired prediction / ground-truth bundle. All per-pixel arrays
// share the ground-truth camera's dimensions.
struct SceneView {
  std::string image_id;

  CameraModel gt_camera{1, 1, 1.0, 1.0, 0.5, 0.5};
  ViewPose gt_pose;
  DepthMap gt_depth;
  Mask gt_mask;

  // Missing predicted intrinsics make the ray error fall back to rays taken
  // from the predicted point map.
  std::optional<CameraModel> pred_camera;
  ViewPose pred_pose;
  // Missing predicted depth is derived from the point map and predicted pose.
  std::optional<DepthMap> pred_depth;
  // Row-major point map in the prediction frame; non-finite entries are
  // invalid. Missing point maps are unprojected from depth and camera.
  std::optional<PointCloud> pred_points;
};

struct SceneSample {
  std::vector<SceneView> views;
  double voxel_size = 0.25;
};

struct EvalOptions {
  SceneAlignmentParams alignment;
  // Neighbor selection for Chamfer; distances are always L1.
  DistanceMetric chamfer_neighbor = DistanceMetric::kL1;
  // Evaluate ray and depth terms on every stride-th pixel in u and v.
  int pixel_stride = 1;
};

struct ViewMetrics {
  std::string image_id;
  double ray_error = 0.0;       // degrees, mean over the view's pixels
  double absrel = 0.0;
  double center_error = 0.0;    // meters, after S*
  double rotation_error = 0.0;  // degrees, after S*
  size_t ray_pixels = 0;
  size_t depth_pixels = 0;
};

struct EvalReport {
  double absrel = 0.0;
  double ray_error = 0.0;        // degrees
  double chamfer = 0.0;          // meters
  double chamfer_pred_to_gt = 0.0;
  double chamfer_gt_to_pred = 0.0;
  double ate_shared = 0.0;       // meters, mean
  double ate_independent = 0.0;  // meters, mean
  double ate_gap = 0.0;          // ate_shared - ate_independent
  double ate_shared_rmse = 0.0;
  double ate_independent_rmse = 0.0;
  double rotation_mae = 0.0;     // degrees

  Sim3Transform alignment;       // S*
  double alignment_rms = 0.0;
  Sim3Transform trajectory_alignment;
  size_t pred_cloud_size = 0;    // after voxel downsampling
  size_t gt_cloud_size = 0;
  std::vector<ViewMetrics> per_view;
};

struct ChamferResult {
  double one_way_ab = 0.0;
  double one_way_ba = 0.0;
  double symmetric = 0.0;
};

// One centroid per occupied cell floor(x / voxel), in first-seen order.
PointCloud VoxelDownsample(const PointCloud& cloud, double voxel);

// mean_a min_b |a - b|_1 in both directions and their average.
ChamferResult ChamferL1(const PointCloud& a, const PointCloud& b,
                        DistanceMetric neighbor = DistanceMetric::kL1);

// Mean angle (degrees) between predicted and ground-truth camera-frame rays
// over masked pixels.
double RayError(const CameraModel& pred, const CameraModel& gt,
                const Mask& mask);
double RayError(const RayMap& pred, const CameraModel& gt, const Mask& mask);
// Ray angle (degrees) at one continuous image location.
double RayAngleAt(const CameraModel& pred, const CameraModel& gt, double x,
                  double y);

// Mean Euclidean distance between already-aligned and reference centers.
double PoseAte(const PointCloud& pred_centers_aligned,
               const PointCloud& gt_centers);

// Mean |pred - gt| / gt over masked pixels; pred is already scaled by S*.
double AbsRelDepth(const DepthMap& pred_depth_aligned, const DepthMap& gt_depth,
                   const Mask& mask);

double RotationMae(const std::vector<Eigen::Matrix3d>& pred_rotations,
                   const std::vector<Eigen::Matrix3d>& gt_rotations);

// ATE under shared alignment minus ATE under independent camera alignment.
double GapStatistic(double ate_shared, double ate_independent);

// Shared-alignment evaluation of one multi-view sample: one S* from the
// point maps is applied to points, depths, and every predicted pose.
EvalReport EvaluateShared(const SceneSample& sample,
                          const EvalOptions& options = {});

}  // namespace uavgeo
