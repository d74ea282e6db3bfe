#include "uavgeo/geometry.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"
#include "uavgeo/error.h"

namespace uavgeo {
namespace {

using testing::RandomRotation;
using testing::RandomSim3;
using testing::Rng;
using testing::Uniform;

Eigen::Matrix3d RotZ(double deg) {
  return Eigen::AngleAxisd(DegToRad(deg), Eigen::Vector3d::UnitZ())
      .toRotationMatrix();
}

TEST(HfovToFocal, Examples) {
  EXPECT_NEAR(HfovToFocal(90.0, 2), 1.0, 1e-15);
  // 1000 / (2 tan 30deg) = 500 sqrt(3).
  EXPECT_NEAR(HfovToFocal(60.0, 1000), 500.0 * std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(HfovToFocal(25.0, 518), 518.0 / (2.0 * std::tan(kPi / 14.4)),
              1e-9);
  EXPECT_NEAR(HfovToFocal(25.0, 518), 1168.27, 0.01);
}

TEST(HfovToFocal, RejectsOutOfRange) {
  EXPECT_THROW(HfovToFocal(0.0, 100), DomainError);
  EXPECT_THROW(HfovToFocal(180.0, 100), DomainError);
  EXPECT_THROW(HfovToFocal(-5.0, 100), DomainError);
  EXPECT_THROW(HfovToFocal(60.0, 0), DomainError);
}

TEST(HfovToFocal, InverseOfCameraHfov) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double theta = Uniform(rng, 1.0, 179.0);
    const int w = 1 + static_cast<int>(rng() % 8000);
    const CameraModel cam = CameraModel::FromHfov(w, w, theta);
    EXPECT_NEAR(cam.Hfov(), theta, 1e-9 * theta);
    EXPECT_NEAR(HfovToFocal(FocalToHfov(cam.Fx(), w), w), cam.Fx(),
                1e-9 * cam.Fx());
  }
}

TEST(FootprintWidth, Examples) {
  EXPECT_NEAR(FootprintWidth(100.0, 90.0), 200.0, 1e-12);
  EXPECT_NEAR(FootprintWidth(100.0, RadToDeg(2.0 * std::atan(0.5))), 100.0,
              1e-12);
  EXPECT_NEAR(FootprintWidth(100.0, 53.1301), 100.0, 1e-4);
  const double ratio =
      AltitudeForFootprint(90.0, 25.0) / AltitudeForFootprint(90.0, 95.0);
  EXPECT_NEAR(ratio, std::tan(DegToRad(47.5)) / std::tan(DegToRad(12.5)),
              1e-12);
  EXPECT_NEAR(ratio, 4.92, 0.005);
  EXPECT_THROW(FootprintWidth(0.0, 60.0), DomainError);
  EXPECT_THROW(FootprintWidth(-1.0, 60.0), DomainError);
}

TEST(AltitudeForFootprint, Examples) {
  EXPECT_NEAR(AltitudeForFootprint(200.0, 90.0), 100.0, 1e-12);
  EXPECT_NEAR(AltitudeForFootprint(90.0, 25.0),
              45.0 / std::tan(DegToRad(12.5)), 1e-9);
  EXPECT_NEAR(AltitudeForFootprint(90.0, 95.0),
              45.0 / std::tan(DegToRad(47.5)), 1e-9);
  EXPECT_NEAR(AltitudeForFootprint(90.0, 95.0), 41.24, 0.01);
  EXPECT_THROW(AltitudeForFootprint(0.0, 60.0), DomainError);
  EXPECT_THROW(AltitudeForFootprint(10.0, 180.0), DomainError);
}

TEST(AltitudeForFootprint, RoundTripsWithFootprint) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double theta = Uniform(rng, 1.0, 179.0);
    const double h = std::exp(Uniform(rng, 0.0, std::log(1e4)));
    const double back = AltitudeForFootprint(FootprintWidth(h, theta), theta);
    EXPECT_NEAR(back, h, 1e-9 * h);
  }
}

TEST(CameraModel, Validation) {
  EXPECT_THROW(CameraModel(0, 10, 1, 1, 0, 0), ValidationError);
  EXPECT_THROW(CameraModel(10, 10, 0, 1, 0, 0), ValidationError);
  EXPECT_THROW(CameraModel(10, 10, 1, -1, 0, 0), ValidationError);
  EXPECT_THROW(CameraModel(10, 10, 1, 1, NAN, 0), ValidationError);
  EXPECT_NO_THROW(CameraModel(1, 1, 1, 1, -3, 7));
}

TEST(PixelRays, PrincipalPointIsOpticalAxis) {
  // Odd size so a pixel center sits on the principal point.
  const CameraModel cam = CameraModel::FromHfov(101, 51, 70.0);
  const RayMap rays = PixelRays(cam);
  const Eigen::Vector3d axis = rays.At(50, 25);
  EXPECT_NEAR((axis - Eigen::Vector3d::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(PixelRays, EdgeOfNinetyDegreeCamera) {
  const CameraModel cam = CameraModel::FromHfov(640, 480, 90.0);
  const Eigen::Vector3d edge = cam.RayThrough(0.0, cam.Cy());
  EXPECT_NEAR(VectorAngle(edge, Eigen::Vector3d::UnitZ()), 45.0, 1e-12);
  EXPECT_EQ(edge.y(), 0.0);
  // The outermost pixel center sits half a pixel inside the border.
  const RayMap rays = PixelRays(cam);
  const double inner = RadToDeg(std::atan(std::hypot(319.5, 0.5) / cam.Fx()));
  EXPECT_NEAR(VectorAngle(rays.At(0, 240), Eigen::Vector3d::UnitZ()), inner,
              1e-9);
}

TEST(PixelRays, UnitNormAndDirection) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const int w = 1 + static_cast<int>(rng() % 64);
    const int h = 1 + static_cast<int>(rng() % 64);
    const CameraModel cam(w, h, Uniform(rng, 5, 500), Uniform(rng, 5, 500),
                          Uniform(rng, -10, 70), Uniform(rng, -10, 70));
    const RayMap rays = PixelRays(cam);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        EXPECT_NEAR(rays.At(u, v).norm(), 1.0, 1e-12);
        EXPECT_NEAR(
            (rays.At(u, v) - cam.PixelRay(u, v).normalized()).norm(), 0.0,
            1e-15);
      }
    }
  }
}

TEST(RayMap, NormalizesAndChecksSize) {
  const RayMap m(1, 1, {Eigen::Vector3d(0, 0, 5)});
  EXPECT_EQ(m.At(0, 0), Eigen::Vector3d::UnitZ());
  EXPECT_THROW(RayMap(2, 1, {Eigen::Vector3d::UnitZ()}), ValidationError);
}

TEST(ViewPose, RejectsNonRotation) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = -1.0;  // reflection
  EXPECT_THROW(ViewPose(m, Eigen::Vector3d::Zero()), ValidationError);
  m = Eigen::Matrix3d::Identity() * 1.001;
  EXPECT_THROW(ViewPose(m, Eigen::Vector3d::Zero()), ValidationError);
}

TEST(ViewPose, WorldCameraRoundTrip) {
  Rng rng(4);
  const ViewPose pose(RandomRotation(rng), Eigen::Vector3d(1, 2, 3));
  const Eigen::Vector3d x(4, -5, 6);
  EXPECT_NEAR((pose.CameraToWorld(pose.WorldToCamera(x)) - x).norm(), 0.0,
              1e-12);
  EXPECT_NEAR((pose.CameraToWorld(Eigen::Vector3d::Zero()) - pose.Center())
                  .norm(),
              0.0, 1e-15);
}

TEST(ApplySim3, Examples) {
  const PointCloud pts = {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-2, 0, 5)};
  EXPECT_EQ(ApplySim3(Sim3Transform::Identity(), pts), pts);
  const Sim3Transform doubling(2.0, Eigen::Matrix3d::Identity(),
                               Eigen::Vector3d::Zero());
  EXPECT_EQ(ApplySim3(doubling, pts)[0], Eigen::Vector3d(2, 2, 2));

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Sim3Transform t = RandomSim3(rng, 0.1, 10.0, 100.0);
    const Eigen::Vector3d x(Uniform(rng, -50, 50), Uniform(rng, -50, 50),
                            Uniform(rng, -50, 50));
    EXPECT_NEAR((t.Inverse() * (t * x) - x).norm(), 0.0, 1e-9);
  }
}

TEST(ApplySim3, PoseMapsCenterAndRotation) {
  Rng rng(6);
  const Sim3Transform t = RandomSim3(rng, 0.5, 2.0, 10.0);
  const ViewPose pose(RandomRotation(rng), Eigen::Vector3d(3, 2, 1));
  const ViewPose moved = ApplySim3(t, pose);
  EXPECT_NEAR((moved.Center() - t * pose.Center()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((moved.Rotation() - t.Rotation() * pose.Rotation()).norm(), 0.0,
              1e-12);
  // A camera-frame point lands where the transformed world point does.
  const Eigen::Vector3d cam_pt(0.3, -0.2, 4.0);
  EXPECT_NEAR((moved.CameraToWorld(t.Scale() * cam_pt) -
               t * pose.CameraToWorld(cam_pt))
                  .norm(),
              0.0, 1e-9);
}

TEST(ApplySim3, DistributesOverComposition) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Sim3Transform t1 = RandomSim3(rng, 0.1, 10.0, 100.0);
    const Sim3Transform t2 = RandomSim3(rng, 0.1, 10.0, 100.0);
    const Sim3Transform t3 = RandomSim3(rng, 0.1, 10.0, 100.0);
    const PointCloud x = {Eigen::Vector3d(Uniform(rng, -9, 9),
                                          Uniform(rng, -9, 9),
                                          Uniform(rng, -9, 9))};
    const double scale = 1.0 + (t2 * (t1 * x[0])).norm();
    EXPECT_NEAR(
        (ApplySim3(t2, ApplySim3(t1, x))[0] - ApplySim3(t2 * t1, x)[0]).norm(),
        0.0, 1e-9 * scale);
    // Associativity.
    const Eigen::Matrix4d a = ((t3 * t2) * t1).Matrix();
    const Eigen::Matrix4d b = (t3 * (t2 * t1)).Matrix();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + a.norm()));
  }
}

TEST(Sim3Transform, Validation) {
  EXPECT_THROW(Sim3Transform(0.0, Eigen::Matrix3d::Identity(),
                             Eigen::Vector3d::Zero()),
               ValidationError);
  EXPECT_THROW(Sim3Transform(1.0, 2.0 * Eigen::Matrix3d::Identity(),
                             Eigen::Vector3d::Zero()),
               ValidationError);
}

TEST(RotationAngle, Examples) {
  Rng rng(8);
  const Eigen::Matrix3d r = RandomRotation(rng);
  EXPECT_EQ(RotationAngle(r, r), 0.0);
  EXPECT_NEAR(RotationAngle(Eigen::Matrix3d::Identity(), RotZ(10.0)), 10.0,
              1e-12);
  EXPECT_NEAR(RotationAngle(Eigen::Matrix3d::Identity(), RotZ(180.0)), 180.0,
              1e-9);
  EXPECT_NEAR(RotationAngle(Eigen::Matrix3d::Identity(), RotZ(1e-6)), 1e-6,
              1e-12);
}

TEST(RotationAngle, Properties) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d a = RandomRotation(rng);
    const Eigen::Matrix3d b = RandomRotation(rng);
    const Eigen::Matrix3d p = RandomRotation(rng);
    const double ab = RotationAngle(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 180.0);
    EXPECT_NEAR(ab, RotationAngle(b, a), 1e-9);
    EXPECT_NEAR(ab, RotationAngle(p * a, p * b), 1e-9);
    // Oracle: angle of the relative rotation through its axis-angle form.
    EXPECT_NEAR(ab, RadToDeg(Eigen::AngleAxisd(a.transpose() * b).angle()),
                1e-7);
  }
}

TEST(RotationAngle, RejectsDriftedInput) {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 1) = 1e-4;
  EXPECT_THROW(RotationAngle(bad, Eigen::Matrix3d::Identity()),
               ValidationError);
}

TEST(VectorAngle, Examples) {
  EXPECT_NEAR(VectorAngle(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()),
              90.0, 1e-12);
  EXPECT_NEAR(VectorAngle(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(-3, 0, 0)),
              180.0, 1e-12);
  EXPECT_EQ(VectorAngle(Eigen::Vector3d(2, 2, 2), Eigen::Vector3d(1, 1, 1)),
            0.0);
}

}  // namespace
}  // namespace uavgeo
