#include "uavgeo/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

constexpr double kPoseRotationTol = 1e-9;
constexpr double kAngleRotationTol = 1e-6;

void CheckHfov(double hfov_deg) {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) {
    throw DomainError("HFOV must lie in (0, 180) degrees, got " +
                      std::to_string(hfov_deg));
  }
}

}  // namespace

CameraModel::CameraModel(int width, int height, double fx, double fy,
                         double cx, double cy)
    : width_(width), height_(height), fx_(fx), fy_(fy), cx_(cx), cy_(cy) {
  if (width < 1 || height < 1) {
    throw ValidationError("camera image size must be positive");
  }
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) ||
      !std::isfinite(fy)) {
    throw ValidationError("camera focal lengths must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw ValidationError("camera principal point must be finite");
  }
}

CameraModel CameraModel::FromHfov(int width, int height, double hfov_deg) {
  const double f = HfovToFocal(hfov_deg, width);
  return CameraModel(width, height, f, f, 0.5 * width, 0.5 * height);
}

double CameraModel::Hfov() const { return FocalToHfov(fx_, width_); }

double CameraModel::Vfov() const { return FocalToHfov(fy_, height_); }

ViewPose::ViewPose()
    : rotation_(Eigen::Matrix3d::Identity()),
      center_(Eigen::Vector3d::Zero()) {}

ViewPose::ViewPose(const Eigen::Matrix3d& rotation,
                   const Eigen::Vector3d& center)
    : rotation_(rotation), center_(center) {
  if (!IsRotationMatrix(rotation, kPoseRotationTol)) {
    throw ValidationError("pose rotation is not orthonormal with det +1");
  }
  if (!center.allFinite()) {
    throw ValidationError("pose center must be finite");
  }
}

Sim3Transform::Sim3Transform()
    : scale_(1.0),
      rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

Sim3Transform::Sim3Transform(double scale, const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation)
    : scale_(scale), rotation_(rotation), translation_(translation) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("similarity scale must be positive");
  }
  if (!IsRotationMatrix(rotation, kPoseRotationTol)) {
    throw ValidationError(
        "similarity rotation is not orthonormal with det +1");
  }
  if (!translation.allFinite()) {
    throw ValidationError("similarity translation must be finite");
  }
}

Sim3Transform Sim3Transform::Inverse() const {
  const double inv_scale = 1.0 / scale_;
  const Eigen::Matrix3d inv_rotation = rotation_.transpose();
  return Sim3Transform(inv_scale, inv_rotation,
                       -inv_scale * (inv_rotation * translation_));
}

Eigen::Matrix4d Sim3Transform::Matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = scale_ * rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Sim3Transform Sim3Transform::operator*(const Sim3Transform& other) const {
  return Sim3Transform(
      scale_ * other.scale_, rotation_ * other.rotation_,
      scale_ * (rotation_ * other.translation_) + translation_);
}

RayMap::RayMap(int width, int height, std::vector<Eigen::Vector3d> directions)
    : width_(width), height_(height), directions_(std::move(directions)) {
  if (width < 1 || height < 1 ||
      directions_.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("ray map size does not match its dimensions");
  }
  for (auto& d : directions_) {
    const double n = d.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ValidationError("ray map contains a zero or non-finite ray");
    }
    if (std::abs(n - 1.0) > 1e-12) d /= n;
  }
}

double HfovToFocal(double hfov_deg, int width) {
  CheckHfov(hfov_deg);
  if (width < 1) throw DomainError("image width must be positive");
  return width / (2.0 * std::tan(DegToRad(hfov_deg) / 2.0));
}

double FocalToHfov(double focal, int width) {
  if (!(focal > 0.0)) throw DomainError("focal length must be positive");
  if (width < 1) throw DomainError("image width must be positive");
  return RadToDeg(2.0 * std::atan(width / (2.0 * focal)));
}

double FootprintWidth(double altitude, double hfov_deg) {
  if (!(altitude > 0.0)) throw DomainError("altitude must be positive");
  CheckHfov(hfov_deg);
  return 2.0 * altitude * std::tan(DegToRad(hfov_deg) / 2.0);
}

double AltitudeForFootprint(double target_width, double hfov_deg) {
  if (!(target_width > 0.0)) {
    throw DomainError("footprint width must be positive");
  }
  CheckHfov(hfov_deg);
  return target_width / (2.0 * std::tan(DegToRad(hfov_deg) / 2.0));
}

RayMap PixelRays(const CameraModel& camera) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(static_cast<size_t>(camera.Width()) * camera.Height());
  for (int v = 0; v < camera.Height(); ++v) {
    for (int u = 0; u < camera.Width(); ++u) {
      dirs.push_back(camera.PixelRay(u, v).normalized());
    }
  }
  return RayMap(camera.Width(), camera.Height(), std::move(dirs));
}

PointCloud ApplySim3(const Sim3Transform& transform, const PointCloud& points) {
  PointCloud out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(transform * p);
  return out;
}

ViewPose ApplySim3(const Sim3Transform& transform, const ViewPose& pose) {
  return ViewPose(transform.Rotation() * pose.Rotation(),
                  transform * pose.Center());
}

bool IsRotationMatrix(const Eigen::Matrix3d& rotation, double tol) {
  if (!rotation.allFinite()) return false;
  const Eigen::Matrix3d rtr = rotation.transpose() * rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

double RotationAngle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  if (!IsRotationMatrix(a, kAngleRotationTol) ||
      !IsRotationMatrix(b, kAngleRotationTol)) {
    throw ValidationError("rotation_angle input is not a rotation matrix");
  }
  const Eigen::Matrix3d rel = a.transpose() * b;
  // cos from the trace, sin from the skew part; equal to the clamped acos
  // form but keeps full precision near 0 and 180 degrees.
  const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                             rel(1, 0) - rel(0, 1));
  const double sin_angle = std::min(1.0, 0.5 * skew.norm());
  return RadToDeg(std::atan2(sin_angle, cos_angle));
}

double VectorAngle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return RadToDeg(std::atan2(a.cross(b).norm(), a.dot(b)));
}

}  // namespace uavgeo
