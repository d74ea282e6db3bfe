#include "uavgeo/alignment.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "uavgeo/error.h"
#include "uavgeo/kdtree.h"

namespace uavgeo {
namespace {

constexpr double kDegeneracyRatio = 1e-12;

Sim3Transform SolveUmeyama(const PointCloud& src, const PointCloud& dst,
                           bool with_scale, bool check_rank) {
  if (src.size() != dst.size()) {
    throw ValidationError("Umeyama needs equally sized point sets (" +
                          std::to_string(src.size()) + " vs " +
                          std::to_string(dst.size()) + ")");
  }
  if (src.size() < 3) {
    throw InsufficientDataError("Umeyama needs at least 3 correspondences, got " +
                                std::to_string(src.size()));
  }
  const double n = static_cast<double>(src.size());

  Eigen::Vector3d mean_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_dst = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= n;
  mean_dst /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_cov = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d s = src[i] - mean_src;
    const Eigen::Vector3d d = dst[i] - mean_dst;
    cross += d * s.transpose();
    src_cov += s * s.transpose();
  }
  cross /= n;
  src_cov /= n;
  const double src_var = src_cov.trace();

  if (check_rank) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(src_cov,
                                                       Eigen::EigenvaluesOnly);
    const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
    if (!(ev[2] > 0.0) || !(ev[1] > kDegeneracyRatio * ev[2])) {
      throw DegenerateConfigurationError(
          "source points are collinear or coincident");
    }
  } else if (!(src_var > 0.0)) {
    throw DegenerateConfigurationError("source points are coincident");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d signs = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    signs[2] = -1.0;
  }
  const Eigen::Matrix3d rotation =
      svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  const double scale =
      with_scale ? svd.singularValues().dot(signs) / src_var : 1.0;
  const Eigen::Vector3d translation = mean_dst - scale * rotation * mean_src;
  return Sim3Transform(scale, rotation, translation);
}

// Indices of the keep_count smallest residuals, returned in index order.
// Ties break on index so the selection is deterministic.
std::vector<size_t> SelectBest(const std::vector<double>& residuals,
                               size_t keep_count) {
  std::vector<size_t> order(residuals.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const auto cmp = [&](size_t a, size_t b) {
    return residuals[a] < residuals[b] ||
           (residuals[a] == residuals[b] && a < b);
  };
  if (keep_count < order.size()) {
    std::nth_element(order.begin(), order.begin() + keep_count, order.end(),
                     cmp);
    order.resize(keep_count);
  }
  std::sort(order.begin(), order.end());
  return order;
}

size_t KeepCount(size_t n, double trim_fraction) {
  const auto keep = static_cast<size_t>(
      std::ceil((1.0 - trim_fraction) * static_cast<double>(n) - 1e-9));
  return std::clamp<size_t>(keep, std::min<size_t>(3, n), n);
}

}  // namespace

void IcpParams::Validate() const {
  if (max_iterations < 1) {
    throw ValidationError("ICP max_iterations must be at least 1");
  }
  if (!(convergence_rel_tol > 0.0)) {
    throw ValidationError("ICP convergence_rel_tol must be positive");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ValidationError("ICP trim_fraction must lie in [0, 0.5)");
  }
  if (max_correspondence_dist && !(*max_correspondence_dist > 0.0)) {
    throw ValidationError("ICP max_correspondence_dist must be positive");
  }
}

Sim3Transform Umeyama(const PointCloud& src, const PointCloud& dst,
                      bool with_scale) {
  return SolveUmeyama(src, dst, with_scale, /*check_rank=*/true);
}

Sim3Transform UmeyamaRankTolerant(const PointCloud& src, const PointCloud& dst,
                                  bool with_scale) {
  return SolveUmeyama(src, dst, with_scale, /*check_rank=*/false);
}

double RmsResidual(const Sim3Transform& transform, const PointCloud& src,
                   const PointCloud& dst) {
  if (src.size() != dst.size() || src.empty()) {
    throw ValidationError("RMS residual needs equally sized non-empty sets");
  }
  double sum = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    sum += (transform * src[i] - dst[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(src.size()));
}

AlignmentResult Icp(const PointCloud& src, const PointCloud& dst,
                    const Sim3Transform& init, const IcpParams& params) {
  params.Validate();
  if (src.empty() || dst.empty()) {
    throw InsufficientDataError("ICP needs non-empty source and target clouds");
  }

  const KdTree tree(dst);
  const bool rigid = params.mode == IcpMode::kRigid;
  // Rigid mode keeps the scale of the initial transform.
  const Sim3Transform pre_scale(init.Scale(), Eigen::Matrix3d::Identity(),
                                Eigen::Vector3d::Zero());
  PointCloud scaled_src;
  if (rigid) scaled_src = ApplySim3(pre_scale, src);

  AlignmentResult result;
  result.transform = init;
  Sim3Transform current = init;

  std::vector<double> dists(src.size());
  std::vector<size_t> nn(src.size());
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    std::vector<size_t> candidates;
    candidates.reserve(src.size());
    for (size_t i = 0; i < src.size(); ++i) {
      const Neighbor hit = tree.Nearest(current * src[i]);
      nn[i] = hit.index;
      dists[i] = hit.distance;
      if (!params.max_correspondence_dist ||
          hit.distance <= *params.max_correspondence_dist) {
        candidates.push_back(i);
      }
    }
    if (candidates.empty()) {
      if (iter == 0) {
        throw NoCorrespondenceError(
            "no ICP correspondence within the distance gate");
      }
      break;
    }

    std::vector<double> cand_dists(candidates.size());
    for (size_t k = 0; k < candidates.size(); ++k) {
      cand_dists[k] = dists[candidates[k]];
    }
    const std::vector<size_t> kept =
        SelectBest(cand_dists, KeepCount(candidates.size(),
                                         params.trim_fraction));
    double sum_sq = 0.0;
    for (size_t k : kept) sum_sq += cand_dists[k] * cand_dists[k];
    const double rms = std::sqrt(sum_sq / static_cast<double>(kept.size()));

    if (!result.residual_trace.empty() && rms > result.residual_trace.back()) {
      // A changed inlier gate (or rounding at convergence) made this round
      // worse; keep the previous transform.
      break;
    }
    const double prev_rms = result.residual_trace.empty()
                                ? rms
                                : result.residual_trace.back();
    result.transform = current;
    result.rms_residual = rms;
    result.inlier_count = kept.size();
    result.iterations_used = iter + 1;
    result.residual_trace.push_back(rms);

    if (rms == 0.0) break;
    if (iter > 0 && prev_rms - rms <= params.convergence_rel_tol * prev_rms) {
      break;
    }
    if (kept.size() < 3) {
      throw InsufficientDataError("fewer than 3 ICP correspondences survived");
    }

    PointCloud src_kept;
    PointCloud dst_kept;
    src_kept.reserve(kept.size());
    dst_kept.reserve(kept.size());
    for (size_t k : kept) {
      const size_t i = candidates[k];
      src_kept.push_back(rigid ? scaled_src[i] : src[i]);
      dst_kept.push_back(tree.Points()[nn[i]]);
    }
    try {
      const Sim3Transform step = UmeyamaRankTolerant(src_kept, dst_kept,
                                                     /*with_scale=*/!rigid);
      current = rigid ? step * pre_scale : step;
    } catch (const DegenerateConfigurationError&) {
      break;
    }
  }
  return result;
}

AlignmentResult AlignScene(const std::vector<PointMapView>& pred,
                           const std::vector<PointMapView>& gt,
                           const SceneAlignmentParams& params) {
  if (pred.size() != gt.size()) {
    throw ValidationError("prediction and ground truth view counts differ");
  }
  if (!(params.trim_fraction >= 0.0 && params.trim_fraction < 1.0)) {
    throw ValidationError("scene trim_fraction must lie in [0, 1)");
  }
  PointCloud pred_pts;
  PointCloud gt_pts;
  PointCloud gt_cloud;
  for (size_t v = 0; v < pred.size(); ++v) {
    const PointMapView& p = pred[v];
    const PointMapView& g = gt[v];
    const size_t n = static_cast<size_t>(g.width) * g.height;
    if (p.width != g.width || p.height != g.height || p.points.size() != n ||
        g.points.size() != n || p.valid.size() != n || g.valid.size() != n) {
      throw ValidationError("point map dimensions differ in view " +
                            std::to_string(v));
    }
    for (size_t i = 0; i < n; ++i) {
      if (!g.valid[i] || !g.points[i].allFinite()) continue;
      gt_cloud.push_back(g.points[i]);
      if (p.valid[i] && p.points[i].allFinite()) {
        pred_pts.push_back(p.points[i]);
        gt_pts.push_back(g.points[i]);
      }
    }
  }
  if (pred_pts.empty()) {
    throw InsufficientDataError("no jointly valid pixels for scene alignment");
  }

  Sim3Transform transform = Umeyama(pred_pts, gt_pts, /*with_scale=*/true);
  std::vector<size_t> kept(pred_pts.size());
  std::iota(kept.begin(), kept.end(), size_t{0});
  if (params.trim_fraction > 0.0) {
    const size_t keep_count = KeepCount(pred_pts.size(), params.trim_fraction);
    std::vector<double> residuals(pred_pts.size());
    for (int round = 0; round < params.trim_rounds; ++round) {
      for (size_t i = 0; i < pred_pts.size(); ++i) {
        residuals[i] = (transform * pred_pts[i] - gt_pts[i]).norm();
      }
      std::vector<size_t> next = SelectBest(residuals, keep_count);
      if (round > 0 && next == kept) break;
      kept = std::move(next);
      PointCloud src;
      PointCloud dst;
      src.reserve(kept.size());
      dst.reserve(kept.size());
      for (size_t i : kept) {
        src.push_back(pred_pts[i]);
        dst.push_back(gt_pts[i]);
      }
      transform = Umeyama(src, dst, /*with_scale=*/true);
    }
  }

  PointCloud icp_src;
  icp_src.reserve(kept.size());
  for (size_t i : kept) icp_src.push_back(pred_pts[i]);
  IcpParams icp = params.icp;
  icp.mode = IcpMode::kSimilarity;
  return Icp(icp_src, gt_cloud, transform, icp);
}

AlignmentResult AlignTrajectory(const PointCloud& pred_centers,
                                const PointCloud& gt_centers) {
  AlignmentResult result;
  result.transform = Umeyama(pred_centers, gt_centers, /*with_scale=*/true);
  result.rms_residual = RmsResidual(result.transform, pred_centers, gt_centers);
  result.inlier_count = pred_centers.size();
  result.iterations_used = 1;
  result.residual_trace.push_back(result.rms_residual);
  return result;
}

AlignmentResult RegisterLidarToSfm(const PointCloud& lidar,
                                   const PointCloud& sfm,
                                   const std::optional<Sim3Transform>& init,
                                   IcpParams params) {
  if (lidar.empty() || sfm.empty()) {
    throw InsufficientDataError("registration needs non-empty clouds");
  }
  Sim3Transform start;
  if (init) {
    start = *init;
  } else {
    const auto centroid = [](const PointCloud& c) {
      Eigen::Vector3d m = Eigen::Vector3d::Zero();
      for (const auto& p : c) m += p;
      return Eigen::Vector3d(m / static_cast<double>(c.size()));
    };
    const auto rms_radius = [](const PointCloud& c, const Eigen::Vector3d& m) {
      double s = 0.0;
      for (const auto& p : c) s += (p - m).squaredNorm();
      return std::sqrt(s / static_cast<double>(c.size()));
    };
    const Eigen::Vector3d lidar_mean = centroid(lidar);
    const Eigen::Vector3d sfm_mean = centroid(sfm);
    const double lidar_radius = rms_radius(lidar, lidar_mean);
    const double sfm_radius = rms_radius(sfm, sfm_mean);
    const double scale =
        lidar_radius > 0.0 && sfm_radius > 0.0 ? sfm_radius / lidar_radius
                                               : 1.0;
    start = Sim3Transform(scale, Eigen::Matrix3d::Identity(),
                          sfm_mean - scale * lidar_mean);
  }
  params.mode = IcpMode::kRigid;
  return Icp(lidar, sfm, start, params);
}

}  // namespace uavgeo
