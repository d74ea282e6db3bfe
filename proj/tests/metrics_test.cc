#include "uavgeo/metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"
#include "uavgeo/error.h"

namespace uavgeo {
namespace {

using testing::BruteOneWayL1;
using testing::GaussianVector;
using testing::MakeSyntheticScene;
using testing::RandomCloud;
using testing::RandomRotation;
using testing::RandomSim3;
using testing::Rng;
using testing::SyntheticSceneOptions;
using testing::TransformPrediction;
using testing::Uniform;

TEST(VoxelDownsample, Examples) {
  const PointCloud one = {{1.3, -2.2, 7.9}};
  EXPECT_EQ(VoxelDownsample(one, 0.25), one);

  const PointCloud merged = VoxelDownsample({{0, 0, 0}, {0.1, 0, 0}}, 0.25);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_NEAR((merged[0] - Eigen::Vector3d(0.05, 0, 0)).norm(), 0.0, 1e-15);

  EXPECT_EQ(VoxelDownsample({{0, 0, 0}, {0.3, 0, 0}}, 0.25).size(), 2u);
  // Negative coordinates fall in their own floor cell.
  EXPECT_EQ(VoxelDownsample({{-0.1, 0, 0}, {0.1, 0, 0}}, 0.25).size(), 2u);
  EXPECT_THROW(VoxelDownsample(one, 0.0), DomainError);
  EXPECT_THROW(VoxelDownsample(one, -1.0), DomainError);
}

TEST(VoxelDownsample, NeverGrowsAndKeepsCentroid) {
  Rng rng(41);
  const PointCloud cloud = RandomCloud(rng, 5000, 3.0);
  const PointCloud down = VoxelDownsample(cloud, 0.5);
  EXPECT_LE(down.size(), cloud.size());
  EXPECT_LE(down.size(), 12u * 12u * 12u);
  // Every output point lies in a cell that holds some input point.
  for (const auto& p : down) {
    const Eigen::Vector3d cell = (p / 0.5).array().floor();
    bool found = false;
    for (const auto& q : cloud) {
      if (((q / 0.5).array().floor() == cell.array()).all()) {
        found = true;
        break;
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(ChamferL1, Examples) {
  const PointCloud a = {{0, 0, 0}, {1, 2, 3}};
  const ChamferResult same = ChamferL1(a, a);
  EXPECT_EQ(same.symmetric, 0.0);

  const ChamferResult r1 = ChamferL1({{0, 0, 0}}, {{1, 1, 0}});
  EXPECT_EQ(r1.one_way_ab, 2.0);
  EXPECT_EQ(r1.one_way_ba, 2.0);
  EXPECT_EQ(r1.symmetric, 2.0);

  const ChamferResult r2 = ChamferL1({{0, 0, 0}}, {{1, 0, 0}, {3, 0, 0}});
  EXPECT_EQ(r2.one_way_ab, 1.0);
  EXPECT_EQ(r2.one_way_ba, 2.0);
  EXPECT_EQ(r2.symmetric, 1.5);

  EXPECT_THROW(ChamferL1({}, a), InsufficientDataError);
  EXPECT_THROW(ChamferL1(a, {}), InsufficientDataError);
}

TEST(ChamferL1, MatchesBruteForceAndIsSymmetric) {
  Rng rng(42);
  for (int i = 0; i < 30; ++i) {
    const PointCloud a = RandomCloud(rng, 1 + rng() % 300, 5.0);
    const PointCloud b = RandomCloud(rng, 1 + rng() % 300, 5.0);
    const ChamferResult ab = ChamferL1(a, b);
    const ChamferResult ba = ChamferL1(b, a);
    EXPECT_EQ(ab.one_way_ab, BruteOneWayL1(a, b));
    EXPECT_EQ(ab.one_way_ba, BruteOneWayL1(b, a));
    EXPECT_EQ(ab.symmetric, ba.symmetric);
    EXPECT_GE(ab.symmetric, 0.0);
    // L2 neighbor selection can only increase the L1 distance.
    EXPECT_GE(ChamferL1(a, b, DistanceMetric::kL2).one_way_ab,
              ab.one_way_ab - 1e-12);
  }
}

TEST(RayError, IdenticalCamerasGiveZero) {
  const CameraModel cam = CameraModel::FromHfov(64, 48, 70.0);
  EXPECT_EQ(RayError(cam, cam, Mask(64, 48, 1)), 0.0);
  EXPECT_NEAR(RayError(PixelRays(cam), cam, Mask(64, 48, 1)), 0.0, 1e-12);
}

TEST(RayError, EdgeOfNinetyVersusEighty) {
  const CameraModel pred = CameraModel::FromHfov(518, 518, 90.0);
  const CameraModel gt = CameraModel::FromHfov(518, 518, 80.0);
  EXPECT_NEAR(RayAngleAt(pred, gt, 0.0, gt.Cy()), 5.0, 1e-12);
  EXPECT_NEAR(RayAngleAt(pred, gt, 518.0, gt.Cy()), 5.0, 1e-12);
  EXPECT_EQ(RayAngleAt(pred, gt, gt.Cx(), gt.Cy()), 0.0);
}

TEST(RayError, ScaledFocalMatchesBruteForce) {
  const CameraModel gt = CameraModel::FromHfov(80, 60, 65.0);
  const CameraModel pred(80, 60, gt.Fx() * 1.01, gt.Fy() * 1.01, gt.Cx(),
                         gt.Cy());
  double sum = 0.0;
  for (int v = 0; v < 60; ++v) {
    for (int u = 0; u < 80; ++u) {
      const Eigen::Vector3d a((u + 0.5 - pred.Cx()) / pred.Fx(),
                              (v + 0.5 - pred.Cy()) / pred.Fy(), 1.0);
      const Eigen::Vector3d b((u + 0.5 - gt.Cx()) / gt.Fx(),
                              (v + 0.5 - gt.Cy()) / gt.Fy(), 1.0);
      sum += RadToDeg(std::acos(
          std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)));
    }
  }
  EXPECT_NEAR(RayError(pred, gt, Mask(80, 60, 1)), sum / 4800.0, 1e-9);
}

TEST(RayError, MaskSelectsPixels) {
  const CameraModel gt = CameraModel::FromHfov(10, 10, 60.0);
  const CameraModel pred = CameraModel::FromHfov(10, 10, 70.0);
  Mask one(10, 10);
  one.values[3 * 10 + 7] = 1;
  EXPECT_EQ(RayError(pred, gt, one),
            VectorAngle(pred.PixelRay(7, 3), gt.PixelRay(7, 3)));
  EXPECT_THROW(RayError(pred, gt, Mask(10, 10)), InsufficientDataError);
  EXPECT_THROW(RayError(pred, gt, Mask(9, 10, 1)), ValidationError);
  EXPECT_THROW(RayError(CameraModel::FromHfov(11, 10, 60.0), gt, one),
               ValidationError);
}

TEST(PoseAte, Examples) {
  Rng rng(43);
  const PointCloud gt = RandomCloud(rng, 10, 50.0);
  EXPECT_EQ(PoseAte(gt, gt), 0.0);
  PointCloud shifted = gt;
  for (auto& p : shifted) p += Eigen::Vector3d(3, 4, 0);
  EXPECT_NEAR(PoseAte(shifted, gt), 5.0, 1e-12);

  PointCloud noisy = gt;
  double want = 0.0;
  for (auto& p : noisy) {
    const Eigen::Vector3d d = GaussianVector(rng, 2.0);
    p += d;
    want += std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
  }
  EXPECT_NEAR(PoseAte(noisy, gt), want / 10.0, 1e-9);
  EXPECT_THROW(PoseAte({gt[0]}, gt), ValidationError);
}

TEST(AbsRelDepth, Examples) {
  DepthMap gt(4, 3);
  DepthMap pred(4, 3);
  for (double& d : gt.values) d = 1.0;
  for (double& d : pred.values) d = 1.1;
  const Mask all(4, 3, 1);
  EXPECT_EQ(AbsRelDepth(gt, gt, all), 0.0);
  EXPECT_NEAR(AbsRelDepth(pred, gt, all), 0.1, 1e-12);
  DepthMap doubled = gt;
  for (double& d : doubled.values) d *= 2.0;
  EXPECT_EQ(AbsRelDepth(doubled, gt, all), 1.0);

  DepthMap hole = gt;
  hole.values[5] = 0.0;
  EXPECT_THROW(AbsRelDepth(pred, hole, all), ValidationError);
  Mask skip = all;
  skip.values[5] = 0;
  EXPECT_NEAR(AbsRelDepth(pred, hole, skip), 0.1, 1e-12);
  EXPECT_THROW(AbsRelDepth(pred, gt, Mask(4, 3)), InsufficientDataError);
}

TEST(RotationMae, Examples) {
  Rng rng(44);
  std::vector<Eigen::Matrix3d> gt;
  std::vector<Eigen::Matrix3d> pred;
  for (int i = 0; i < 6; ++i) {
    gt.push_back(RandomRotation(rng));
    const Eigen::Matrix3d off =
        Eigen::AngleAxisd(DegToRad(10.0), GaussianVector(rng, 1.0).normalized())
            .toRotationMatrix();
    pred.push_back(i % 2 ? gt.back() * off : gt.back());
  }
  EXPECT_EQ(RotationMae(gt, gt), 0.0);
  EXPECT_NEAR(RotationMae(pred, gt), 5.0, 1e-9);

  std::vector<Eigen::Matrix3d> random;
  double sum = 0.0;
  for (size_t i = 0; i < gt.size(); ++i) {
    random.push_back(RandomRotation(rng));
    sum += RadToDeg(Eigen::AngleAxisd(random[i].transpose() * gt[i]).angle());
  }
  EXPECT_NEAR(RotationMae(random, gt), sum / gt.size(), 1e-7);
  EXPECT_THROW(RotationMae({}, {}), InsufficientDataError);
}

TEST(GapStatistic, Examples) {
  EXPECT_NEAR(GapStatistic(8.32, 3.36), 4.96, 1e-12);
  EXPECT_NEAR(GapStatistic(77.78, 44.51), 33.27, 1e-12);
  EXPECT_EQ(GapStatistic(1.5, 1.5), 0.0);
}

SyntheticSceneOptions Exact() {
  SyntheticSceneOptions o;
  o.point_noise = 0.0;
  o.depth_noise = 0.0;
  o.rotation_noise_deg = 0.0;
  o.center_noise = 0.0;
  o.focal_error = 0.0;
  o.outlier_fraction = 0.0;
  o.pred_invalid_fraction = 0.0;
  o.num_views = 4;
  return o;
}

TEST(EvaluateShared, SelfEvaluationIsZero) {
  SyntheticSceneOptions o = Exact();
  o.pred_frame = Sim3Transform::Identity();
  const EvalReport r = EvaluateShared(MakeSyntheticScene(45, o));
  EXPECT_LT(r.absrel, 1e-6);
  EXPECT_LT(r.ray_error, 1e-6);
  EXPECT_LT(r.chamfer, 1e-6);
  EXPECT_LT(r.ate_shared, 1e-6);
  EXPECT_LT(r.ate_independent, 1e-6);
  EXPECT_LT(r.rotation_mae, 1e-6);
  EXPECT_EQ(r.per_view.size(), 4u);
}

TEST(EvaluateShared, InvariantToPredictionFrame) {
  const SyntheticSceneOptions o = Exact();
  const EvalReport r = EvaluateShared(MakeSyntheticScene(46, o));
  EXPECT_LT(r.absrel, 1e-5);
  EXPECT_LT(r.chamfer, 1e-5);
  EXPECT_LT(r.ate_shared, 1e-5);
  EXPECT_LT(r.ate_independent, 1e-5);
  EXPECT_LT(r.rotation_mae, 1e-5);
}

TEST(EvaluateShared, PoseOffsetOnlyRaisesSharedAte) {
  SyntheticSceneOptions o = Exact();
  o.center_offset = Eigen::Vector3d(10.0, 0.0, 0.0);
  const EvalReport r = EvaluateShared(MakeSyntheticScene(47, o));
  EXPECT_LT(r.chamfer, 1e-5);
  EXPECT_LT(r.ate_independent, 1e-5);
  EXPECT_NEAR(r.ate_shared, 10.0, 1e-5);
  EXPECT_NEAR(r.ate_gap, 10.0, 1e-5);
}

TEST(EvaluateShared, FallbacksWithoutIntrinsicsOrDepth) {
  SyntheticSceneOptions o;
  o.pred_intrinsics = false;
  o.pred_depth = false;
  const SceneSample s = MakeSyntheticScene(48, o);
  const EvalReport r = EvaluateShared(s);
  EXPECT_GT(r.ray_error, 0.0);
  EXPECT_GT(r.absrel, 0.0);
  EXPECT_TRUE(std::isfinite(r.chamfer));

  // Same prediction in another frame leaves every metric unchanged.
  Rng rng(49);
  const EvalReport moved =
      EvaluateShared(TransformPrediction(s, RandomSim3(rng, 0.3, 3.0, 30.0)));
  EXPECT_NEAR(moved.ray_error, r.ray_error, 1e-6);
  EXPECT_NEAR(moved.absrel, r.absrel, 1e-6);
  EXPECT_NEAR(moved.chamfer, r.chamfer, 1e-6);
  EXPECT_NEAR(moved.ate_shared, r.ate_shared, 1e-6);
  EXPECT_NEAR(moved.ate_independent, r.ate_independent, 1e-6);
}

TEST(EvaluateShared, AteRmseIsOptimalAndMeanIsAtLeastIt) {
  // The independent trajectory fit minimises RMSE, so it cannot exceed the
  // RMSE under the shared alignment.
  for (uint64_t seed = 50; seed < 60; ++seed) {
    const EvalReport r = EvaluateShared(MakeSyntheticScene(seed));
    EXPECT_LE(r.ate_independent_rmse, r.ate_shared_rmse + 1e-9);
    EXPECT_LE(r.ate_independent, r.ate_independent_rmse + 1e-12);
  }
}

TEST(EvaluateShared, ErrorCases) {
  SceneSample s = MakeSyntheticScene(61);
  SceneSample few = s;
  few.views.resize(2);
  EXPECT_THROW(EvaluateShared(few), InsufficientDataError);

  SceneSample bad = s;
  for (size_t i = 0; i < bad.views[0].gt_mask.values.size(); ++i) {
    if (bad.views[0].gt_mask.values[i]) {
      bad.views[0].gt_depth.values[i] = 0.0;
      break;
    }
  }
  EXPECT_THROW(EvaluateShared(bad), ValidationError);

  SceneSample empty = s;
  for (auto& v : empty.views) {
    v.gt_mask.values.assign(v.gt_mask.values.size(), 0);
  }
  EXPECT_THROW(EvaluateShared(empty), InsufficientDataError);
}

}  // namespace
}  // namespace uavgeo
