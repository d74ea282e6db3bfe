#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace uavgeo {

using PointCloud = std::vector<Eigen::Vector3d>;

constexpr double kPi = 3.14159265358979323846;

inline double DegToRad(double deg) { return deg * kPi / 180.0; }
inline double RadToDeg(double rad) { return rad * 180.0 / kPi; }

// Pinhole intrinsics plus image size. Pixel (u, v) covers [u, u+1) x [v, v+1)
// and is sampled at its center, so the ray through pixel (u, v) passes through
// continuous image coordinates (u + 0.5, v + 0.5).
class CameraModel {
 public:
  CameraModel(int width, int height, double fx, double fy, double cx,
              double cy);

  // Square-pixel camera with the principal point at the image center.
  static CameraModel FromHfov(int width, int height, double hfov_deg);

  int Width() const { return width_; }
  int Height() const { return height_; }
  double Fx() const { return fx_; }
  double Fy() const { return fy_; }
  double Cx() const { return cx_; }
  double Cy() const { return cy_; }

  // 2 atan(w / (2 fx)) in degrees.
  double Hfov() const;
  // 2 atan(h / (2 fy)) in degrees.
  double Vfov() const;

  // Unnormalized camera-frame ray with z = 1 through the center of (u, v).
  Eigen::Vector3d PixelRay(int u, int v) const {
    return Eigen::Vector3d((u + 0.5 - cx_) / fx_, (v + 0.5 - cy_) / fy_, 1.0);
  }
  // Same through continuous image coordinates; (0, cy) is the left border.
  Eigen::Vector3d RayThrough(double x, double y) const {
    return Eigen::Vector3d((x - cx_) / fx_, (y - cy_) / fy_, 1.0);
  }

  // Continuous image coordinates of a camera-frame point with z > 0.
  Eigen::Vector2d Project(const Eigen::Vector3d& cam_point) const {
    return Eigen::Vector2d(fx_ * cam_point.x() / cam_point.z() + cx_,
                           fy_ * cam_point.y() / cam_point.z() + cy_);
  }

  bool operator==(const CameraModel&) const = default;

 private:
  int width_;
  int height_;
  double fx_;
  double fy_;
  double cx_;
  double cy_;
};

// World-from-camera rigid transform. The camera frame is x right, y down,
// z along the optical axis.
class ViewPose {
 public:
  ViewPose();
  ViewPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center);

  const Eigen::Matrix3d& Rotation() const { return rotation_; }
  const Eigen::Vector3d& Center() const { return center_; }

  Eigen::Vector3d CameraToWorld(const Eigen::Vector3d& cam_point) const {
    return rotation_ * cam_point + center_;
  }
  Eigen::Vector3d WorldToCamera(const Eigen::Vector3d& world_point) const {
    return rotation_.transpose() * (world_point - center_);
  }
  // Optical axis direction in the world frame.
  Eigen::Vector3d ViewDirection() const { return rotation_.col(2); }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d center_;
};

// x -> scale * rotation * x + translation.
class Sim3Transform {
 public:
  Sim3Transform();
  Sim3Transform(double scale, const Eigen::Matrix3d& rotation,
                const Eigen::Vector3d& translation);

  static Sim3Transform Identity() { return Sim3Transform(); }

  double Scale() const { return scale_; }
  const Eigen::Matrix3d& Rotation() const { return rotation_; }
  const Eigen::Vector3d& Translation() const { return translation_; }

  Sim3Transform Inverse() const;
  Eigen::Matrix4d Matrix() const;

  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return scale_ * (rotation_ * x) + translation_;
  }
  // (this * other)(x) == this(other(x)).
  Sim3Transform operator*(const Sim3Transform& other) const;

 private:
  double scale_;
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// Per-pixel unit camera-frame ray directions, row-major.
class RayMap {
 public:
  RayMap(int width, int height, std::vector<Eigen::Vector3d> directions);

  int Width() const { return width_; }
  int Height() const { return height_; }
  const Eigen::Vector3d& At(int u, int v) const {
    return directions_[static_cast<size_t>(v) * width_ + u];
  }
  const std::vector<Eigen::Vector3d>& Directions() const {
    return directions_;
  }

 private:
  int width_;
  int height_;
  std::vector<Eigen::Vector3d> directions_;
};

// f = w / (2 tan(theta / 2)).
double HfovToFocal(double hfov_deg, int width);
double FocalToHfov(double focal, int width);

// Nadir ground footprint W = 2 H tan(theta / 2).
double FootprintWidth(double altitude, double hfov_deg);
double AltitudeForFootprint(double target_width, double hfov_deg);

RayMap PixelRays(const CameraModel& camera);

PointCloud ApplySim3(const Sim3Transform& transform, const PointCloud& points);
ViewPose ApplySim3(const Sim3Transform& transform, const ViewPose& pose);

bool IsRotationMatrix(const Eigen::Matrix3d& rotation, double tol);

// Geodesic angle between two rotations in degrees. Throws ValidationError if
// either matrix drifts from SO(3) by more than 1e-6.
double RotationAngle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Angle between two (not necessarily unit) vectors in degrees.
double VectorAngle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

}  // namespace uavgeo
