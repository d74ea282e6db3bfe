#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uavgeo/geometry.h"

namespace uavgeo {

enum class IcpMode { kRigid, kSimilarity };

struct IcpParams {
  IcpMode mode = IcpMode::kSimilarity;
  int max_iterations = 50;
  // Stop when (rms_prev - rms) <= convergence_rel_tol * rms_prev.
  double convergence_rel_tol = 1e-6;
  // Fraction of the worst correspondences dropped each iteration.
  double trim_fraction = 0.1;
  std::optional<double> max_correspondence_dist;

  void Validate() const;
};

struct AlignmentResult {
  Sim3Transform transform;
  double rms_residual = 0.0;
  size_t inlier_count = 0;
  int iterations_used = 0;
  // RMS residual of every correspondence round; non-increasing.
  std::vector<double> residual_trace;
};

// Closed-form least-squares similarity (or rigid, with_scale = false)
// transform mapping src onto dst. Throws InsufficientDataError for fewer than
// three pairs and DegenerateConfigurationError when the source covariance has
// its second singular value below 1e-12 times the largest.
Sim3Transform Umeyama(const PointCloud& src, const PointCloud& dst,
                      bool with_scale);

// Same estimator without the rank check. Used where the residual is well
// defined even when the transform is not unique (collinear trajectories).
Sim3Transform UmeyamaRankTolerant(const PointCloud& src, const PointCloud& dst,
                                  bool with_scale);

// Trimmed nearest-neighbor ICP from src onto dst starting at init.
AlignmentResult Icp(const PointCloud& src, const PointCloud& dst,
                    const Sim3Transform& init, const IcpParams& params);

// Per-pixel point map of one view. Invalid pixels are masked out; the
// prediction additionally treats non-finite points as invalid.
struct PointMapView {
  int width = 0;
  int height = 0;
  PointCloud points;       // row-major, width * height
  std::vector<uint8_t> valid;  // row-major, width * height
};

struct SceneAlignmentParams {
  // Worst fraction of pixel correspondences dropped before re-solving.
  double trim_fraction = 0.2;
  // Number of drop-and-re-solve rounds; stops early once the kept set is
  // stable.
  int trim_rounds = 10;
  IcpParams icp;
};

// Scene-level similarity S* mapping the prediction frame onto the ground
// truth frame: trimmed Umeyama over jointly valid pixels followed by
// similarity ICP of the kept prediction points against the whole ground-truth
// cloud.
AlignmentResult AlignScene(const std::vector<PointMapView>& pred,
                           const std::vector<PointMapView>& gt,
                           const SceneAlignmentParams& params = {});

// Similarity alignment of camera centers only.
AlignmentResult AlignTrajectory(const PointCloud& pred_centers,
                                const PointCloud& gt_centers);

// LiDAR to SfM registration. Without init the clouds are pre-aligned by
// matching centroids and RMS radii; ICP then runs rigidly with that scale.
// The returned transform maps LiDAR coordinates into the SfM frame.
AlignmentResult RegisterLidarToSfm(const PointCloud& lidar,
                                   const PointCloud& sfm,
                                   const std::optional<Sim3Transform>& init,
                                   IcpParams params);

// Root-mean-square of ||transform * src_i - dst_i||.
double RmsResidual(const Sim3Transform& transform, const PointCloud& src,
                   const PointCloud& dst);

}  // namespace uavgeo
