#include "uavgeo/metrics.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

struct CellKey {
  int64_t x;
  int64_t y;
  int64_t z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = static_cast<uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6);
    h ^= static_cast<uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h >> 2);
    return static_cast<size_t>(h);
  }
};

void CheckSameShape(const Mask& mask, int width, int height,
                    const std::string& what) {
  if (mask.width != width || mask.height != height ||
      mask.Size() != static_cast<size_t>(width) * height) {
    throw ValidationError(what + " dimensions do not match the image");
  }
}

void CheckSameShape(const DepthMap& depth, int width, int height,
                    const std::string& what) {
  if (depth.width != width || depth.height != height ||
      depth.Size() != static_cast<size_t>(width) * height) {
    throw ValidationError(what + " dimensions do not match the image");
  }
}

double OneWayChamfer(const PointCloud& from, const KdTree& to,
                     DistanceMetric neighbor) {
  double sum = 0.0;
  for (const auto& p : from) {
    const Neighbor hit = to.Nearest(p, neighbor);
    sum += neighbor == DistanceMetric::kL1
               ? hit.distance
               : L1Distance(p, to.Points()[hit.index]);
  }
  return sum / static_cast<double>(from.size());
}

// Per-view prediction and ground truth expanded to per-pixel point maps.
struct ExpandedView {
  PointMapView gt;
  PointMapView pred;
  DepthMap pred_depth;
};

ExpandedView ExpandView(const SceneView& view, size_t index) {
  const std::string where =
      "view " + std::to_string(index) + " (" + view.image_id + ")";
  const int w = view.gt_camera.Width();
  const int h = view.gt_camera.Height();
  const size_t n = static_cast<size_t>(w) * h;
  CheckSameShape(view.gt_depth, w, h, where + " ground-truth depth");
  CheckSameShape(view.gt_mask, w, h, where + " mask");
  view.gt_depth.Validate();

  ExpandedView out;
  out.gt.width = out.pred.width = w;
  out.gt.height = out.pred.height = h;
  out.gt.points.assign(n, Eigen::Vector3d::Zero());
  out.gt.valid.assign(n, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const size_t i = static_cast<size_t>(v) * w + u;
      if (!view.gt_mask.values[i]) continue;
      const double d = view.gt_depth.values[i];
      if (!(d > 0.0)) {
        throw ValidationError(where +
                              ": ground-truth depth is not positive inside "
                              "the valid mask");
      }
      out.gt.points[i] =
          view.gt_pose.CameraToWorld(d * view.gt_camera.PixelRay(u, v));
      out.gt.valid[i] = 1;
    }
  }

  if (view.pred_camera && (view.pred_camera->Width() != w ||
                           view.pred_camera->Height() != h)) {
    throw ValidationError(where + ": predicted camera image size differs");
  }
  if (view.pred_depth) {
    CheckSameShape(*view.pred_depth, w, h, where + " predicted depth");
    view.pred_depth->Validate();
  }

  if (view.pred_points) {
    if (view.pred_points->size() != n) {
      throw ValidationError(where + ": predicted point map size differs");
    }
    out.pred.points = *view.pred_points;
    out.pred.valid.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      out.pred.valid[i] = out.pred.points[i].allFinite() ? 1 : 0;
    }
  } else {
    if (!view.pred_depth || !view.pred_camera) {
      throw ValidationError(
          where + ": prediction needs a point map or depth plus intrinsics");
    }
    out.pred.points.assign(n, Eigen::Vector3d::Zero());
    out.pred.valid.assign(n, 0);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const size_t i = static_cast<size_t>(v) * w + u;
        const double d = view.pred_depth->values[i];
        if (!(d > 0.0)) continue;
        out.pred.points[i] =
            view.pred_pose.CameraToWorld(d * view.pred_camera->PixelRay(u, v));
        out.pred.valid[i] = 1;
      }
    }
  }

  if (view.pred_depth) {
    out.pred_depth = *view.pred_depth;
  } else {
    out.pred_depth = DepthMap(w, h);
    for (size_t i = 0; i < n; ++i) {
      if (!out.pred.valid[i]) continue;
      const double z = view.pred_pose.WorldToCamera(out.pred.points[i]).z();
      out.pred_depth.values[i] = z > 0.0 ? z : 0.0;
    }
  }
  return out;
}

}  // namespace

PointCloud VoxelDownsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0) || !std::isfinite(voxel)) {
    throw DomainError("voxel size must be positive");
  }
  std::unordered_map<CellKey, size_t, CellKeyHash> cells;
  cells.reserve(cloud.size());
  std::vector<Eigen::Vector3d> sums;
  std::vector<size_t> counts;
  for (const auto& p : cloud) {
    const CellKey key{static_cast<int64_t>(std::floor(p.x() / voxel)),
                      static_cast<int64_t>(std::floor(p.y() / voxel)),
                      static_cast<int64_t>(std::floor(p.z() / voxel))};
    const auto [it, inserted] = cells.try_emplace(key, sums.size());
    if (inserted) {
      sums.push_back(p);
      counts.push_back(1);
    } else {
      sums[it->second] += p;
      ++counts[it->second];
    }
  }
  PointCloud out;
  out.reserve(sums.size());
  for (size_t i = 0; i < sums.size(); ++i) {
    out.push_back(sums[i] / static_cast<double>(counts[i]));
  }
  return out;
}

ChamferResult ChamferL1(const PointCloud& a, const PointCloud& b,
                        DistanceMetric neighbor) {
  if (a.empty() || b.empty()) {
    throw InsufficientDataError("Chamfer distance needs non-empty clouds");
  }
  const KdTree tree_a(a);
  const KdTree tree_b(b);
  ChamferResult r;
  r.one_way_ab = OneWayChamfer(a, tree_b, neighbor);
  r.one_way_ba = OneWayChamfer(b, tree_a, neighbor);
  r.symmetric = 0.5 * (r.one_way_ab + r.one_way_ba);
  return r;
}

double RayError(const CameraModel& pred, const CameraModel& gt,
                const Mask& mask) {
  if (pred.Width() != gt.Width() || pred.Height() != gt.Height()) {
    throw ValidationError("ray error: camera image sizes differ");
  }
  CheckSameShape(mask, gt.Width(), gt.Height(), "ray error mask");
  double sum = 0.0;
  size_t count = 0;
  for (int v = 0; v < gt.Height(); ++v) {
    for (int u = 0; u < gt.Width(); ++u) {
      if (!mask.At(u, v)) continue;
      sum += VectorAngle(pred.PixelRay(u, v), gt.PixelRay(u, v));
      ++count;
    }
  }
  if (count == 0) throw InsufficientDataError("ray error: empty mask");
  return sum / static_cast<double>(count);
}

double RayError(const RayMap& pred, const CameraModel& gt, const Mask& mask) {
  if (pred.Width() != gt.Width() || pred.Height() != gt.Height()) {
    throw ValidationError("ray error: ray map size differs from the camera");
  }
  CheckSameShape(mask, gt.Width(), gt.Height(), "ray error mask");
  double sum = 0.0;
  size_t count = 0;
  for (int v = 0; v < gt.Height(); ++v) {
    for (int u = 0; u < gt.Width(); ++u) {
      if (!mask.At(u, v)) continue;
      sum += VectorAngle(pred.At(u, v), gt.PixelRay(u, v));
      ++count;
    }
  }
  if (count == 0) throw InsufficientDataError("ray error: empty mask");
  return sum / static_cast<double>(count);
}

double RayAngleAt(const CameraModel& pred, const CameraModel& gt, double x,
                  double y) {
  return VectorAngle(pred.RayThrough(x, y), gt.RayThrough(x, y));
}

double PoseAte(const PointCloud& pred_centers_aligned,
               const PointCloud& gt_centers) {
  if (pred_centers_aligned.size() != gt_centers.size()) {
    throw ValidationError("ATE: center counts differ");
  }
  if (gt_centers.empty()) throw InsufficientDataError("ATE: no cameras");
  double sum = 0.0;
  for (size_t i = 0; i < gt_centers.size(); ++i) {
    sum += (pred_centers_aligned[i] - gt_centers[i]).norm();
  }
  return sum / static_cast<double>(gt_centers.size());
}

double AbsRelDepth(const DepthMap& pred_depth_aligned, const DepthMap& gt_depth,
                   const Mask& mask) {
  CheckSameShape(pred_depth_aligned, gt_depth.width, gt_depth.height,
                 "AbsRel predicted depth");
  CheckSameShape(mask, gt_depth.width, gt_depth.height, "AbsRel mask");
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < gt_depth.Size(); ++i) {
    if (!mask.values[i]) continue;
    const double d = gt_depth.values[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ValidationError("AbsRel: ground-truth depth not positive in mask");
    }
    sum += std::abs(pred_depth_aligned.values[i] - d) / d;
    ++count;
  }
  if (count == 0) throw InsufficientDataError("AbsRel: empty mask");
  return sum / static_cast<double>(count);
}

double RotationMae(const std::vector<Eigen::Matrix3d>& pred_rotations,
                   const std::vector<Eigen::Matrix3d>& gt_rotations) {
  if (pred_rotations.size() != gt_rotations.size()) {
    throw ValidationError("rotation MAE: rotation counts differ");
  }
  if (gt_rotations.empty()) {
    throw InsufficientDataError("rotation MAE: no cameras");
  }
  double sum = 0.0;
  for (size_t i = 0; i < gt_rotations.size(); ++i) {
    sum += RotationAngle(pred_rotations[i], gt_rotations[i]);
  }
  return sum / static_cast<double>(gt_rotations.size());
}

double GapStatistic(double ate_shared, double ate_independent) {
  return ate_shared - ate_independent;
}

EvalReport EvaluateShared(const SceneSample& sample,
                          const EvalOptions& options) {
  if (sample.views.size() < 3) {
    throw InsufficientDataError(
        "shared evaluation needs at least 3 views, got " +
        std::to_string(sample.views.size()));
  }
  if (!(sample.voxel_size > 0.0)) {
    throw DomainError("voxel size must be positive");
  }
  if (options.pixel_stride < 1) {
    throw ValidationError("pixel stride must be at least 1");
  }

  std::vector<ExpandedView> expanded;
  expanded.reserve(sample.views.size());
  for (size_t i = 0; i < sample.views.size(); ++i) {
    expanded.push_back(ExpandView(sample.views[i], i));
  }

  std::vector<PointMapView> pred_maps;
  std::vector<PointMapView> gt_maps;
  pred_maps.reserve(expanded.size());
  gt_maps.reserve(expanded.size());
  for (const auto& e : expanded) {
    pred_maps.push_back(e.pred);
    gt_maps.push_back(e.gt);
  }

  EvalReport report;
  const AlignmentResult scene = AlignScene(pred_maps, gt_maps,
                                           options.alignment);
  const Sim3Transform& s_star = scene.transform;
  report.alignment = s_star;
  report.alignment_rms = scene.rms_residual;

  // Dense geometry.
  PointCloud pred_cloud;
  PointCloud gt_cloud;
  for (const auto& e : expanded) {
    for (size_t i = 0; i < e.gt.valid.size(); ++i) {
      if (!e.gt.valid[i]) continue;
      gt_cloud.push_back(e.gt.points[i]);
      if (e.pred.valid[i]) pred_cloud.push_back(s_star * e.pred.points[i]);
    }
  }
  pred_cloud = VoxelDownsample(pred_cloud, sample.voxel_size);
  gt_cloud = VoxelDownsample(gt_cloud, sample.voxel_size);
  const ChamferResult cd =
      ChamferL1(pred_cloud, gt_cloud, options.chamfer_neighbor);
  report.chamfer = cd.symmetric;
  report.chamfer_pred_to_gt = cd.one_way_ab;
  report.chamfer_gt_to_pred = cd.one_way_ba;
  report.pred_cloud_size = pred_cloud.size();
  report.gt_cloud_size = gt_cloud.size();

  // Per-pixel ray and depth terms, pooled over all views.
  const int stride = options.pixel_stride;
  double ray_sum = 0.0;
  size_t ray_count = 0;
  double depth_sum = 0.0;
  size_t depth_count = 0;
  for (size_t k = 0; k < sample.views.size(); ++k) {
    const SceneView& view = sample.views[k];
    const ExpandedView& e = expanded[k];
    ViewMetrics vm;
    vm.image_id = view.image_id;
    double view_ray = 0.0;
    double view_depth = 0.0;
    const int w = e.gt.width;
    for (int v = 0; v < e.gt.height; v += stride) {
      for (int u = 0; u < w; u += stride) {
        const size_t i = static_cast<size_t>(v) * w + u;
        if (!e.gt.valid[i]) continue;
        const Eigen::Vector3d gt_ray = view.gt_camera.PixelRay(u, v);
        if (view.pred_camera) {
          view_ray += VectorAngle(view.pred_camera->PixelRay(u, v), gt_ray);
          ++vm.ray_pixels;
        } else if (e.pred.valid[i]) {
          view_ray += VectorAngle(
              view.pred_pose.WorldToCamera(e.pred.points[i]), gt_ray);
          ++vm.ray_pixels;
        }
        const double pred_d = e.pred_depth.values[i];
        if (pred_d > 0.0) {
          const double gt_d = view.gt_depth.values[i];
          view_depth += std::abs(s_star.Scale() * pred_d - gt_d) / gt_d;
          ++vm.depth_pixels;
        }
      }
    }
    ray_sum += view_ray;
    ray_count += vm.ray_pixels;
    depth_sum += view_depth;
    depth_count += vm.depth_pixels;
    vm.ray_error = vm.ray_pixels ? view_ray / vm.ray_pixels : 0.0;
    vm.absrel = vm.depth_pixels ? view_depth / vm.depth_pixels : 0.0;
    report.per_view.push_back(std::move(vm));
  }
  if (ray_count == 0 || depth_count == 0) {
    throw InsufficientDataError("sample has no valid pixels for ray or depth");
  }
  report.ray_error = ray_sum / static_cast<double>(ray_count);
  report.absrel = depth_sum / static_cast<double>(depth_count);

  // Cameras under the same S*.
  PointCloud pred_centers;
  PointCloud gt_centers;
  PointCloud aligned_centers;
  std::vector<Eigen::Matrix3d> aligned_rotations;
  std::vector<Eigen::Matrix3d> gt_rotations;
  for (size_t k = 0; k < sample.views.size(); ++k) {
    const SceneView& view = sample.views[k];
    const ViewPose aligned = ApplySim3(s_star, view.pred_pose);
    pred_centers.push_back(view.pred_pose.Center());
    gt_centers.push_back(view.gt_pose.Center());
    aligned_centers.push_back(aligned.Center());
    aligned_rotations.push_back(aligned.Rotation());
    gt_rotations.push_back(view.gt_pose.Rotation());
    report.per_view[k].center_error =
        (aligned.Center() - view.gt_pose.Center()).norm();
    report.per_view[k].rotation_error =
        RotationAngle(aligned.Rotation(), view.gt_pose.Rotation());
  }
  report.ate_shared = PoseAte(aligned_centers, gt_centers);
  report.ate_shared_rmse =
      RmsResidual(Sim3Transform::Identity(), aligned_centers, gt_centers);
  report.rotation_mae = RotationMae(aligned_rotations, gt_rotations);

  Sim3Transform trajectory;
  try {
    trajectory = AlignTrajectory(pred_centers, gt_centers).transform;
  } catch (const DegenerateConfigurationError&) {
    // Collinear flight lines: the optimum is not unique but its residual is.
    trajectory = UmeyamaRankTolerant(pred_centers, gt_centers, true);
  }
  report.trajectory_alignment = trajectory;
  report.ate_independent =
      PoseAte(ApplySim3(trajectory, pred_centers), gt_centers);
  report.ate_independent_rmse =
      RmsResidual(trajectory, pred_centers, gt_centers);
  report.ate_gap = GapStatistic(report.ate_shared, report.ate_independent);
  return report;
}

}  // namespace uavgeo
