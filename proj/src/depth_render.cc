#include "uavgeo/depth_render.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

constexpr double kDegenerateArea = 1e-12;
constexpr double kNearPlane = 1e-6;

struct ZBuffer {
  ZBuffer(int width, int height)
      : width(width),
        height(height),
        depth(static_cast<size_t>(width) * height,
              std::numeric_limits<double>::infinity()) {}

  void Write(int u, int v, double z) {
    double& d = depth[static_cast<size_t>(v) * width + u];
    if (z < d) d = z;
  }

  RenderedDepth Finish(std::string camera_id = {}) const {
    RenderedDepth out{DepthMap(width, height), Mask(width, height)};
    out.depth.camera_id = std::move(camera_id);
    for (size_t i = 0; i < depth.size(); ++i) {
      if (std::isfinite(depth[i])) {
        out.depth.values[i] = depth[i];
        out.mask.values[i] = 255;
      }
    }
    return out;
  }

  int width;
  int height;
  std::vector<double> depth;
};

// Clips a camera-frame polygon to z >= kNearPlane.
std::vector<Eigen::Vector3d> ClipNear(const std::vector<Eigen::Vector3d>& in) {
  std::vector<Eigen::Vector3d> out;
  for (size_t i = 0; i < in.size(); ++i) {
    const Eigen::Vector3d& a = in[i];
    const Eigen::Vector3d& b = in[(i + 1) % in.size()];
    const bool a_in = a.z() >= kNearPlane;
    const bool b_in = b.z() >= kNearPlane;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (kNearPlane - a.z()) / (b.z() - a.z());
      Eigen::Vector3d p = a + t * (b - a);
      p.z() = kNearPlane;
      out.push_back(p);
    }
  }
  return out;
}

int ClampToPixel(double x, int size) {
  return static_cast<int>(std::clamp(x, -1.0, static_cast<double>(size)));
}

// Triangle with every vertex in front of the near plane, camera frame. A
// pixel is covered when its center ray lies inside the three edge planes
// through the camera center; depth is the exact ray-plane intersection.
void RasterizeTriangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                       const Eigen::Vector3d& c, const CameraModel& camera,
                       ZBuffer* zbuf) {
  const Eigen::Vector3d normal = (b - a).cross(c - a);
  const double offset = normal.dot(a);  // also det[a b c]
  if (offset == 0.0 || !std::isfinite(offset)) return;  // edge-on
  const double orient = offset > 0.0 ? 1.0 : -1.0;
  const Eigen::Vector3d e0 = orient * b.cross(c);
  const Eigen::Vector3d e1 = orient * c.cross(a);
  const Eigen::Vector3d e2 = orient * a.cross(b);

  const Eigen::Vector2d sa = camera.Project(a);
  const Eigen::Vector2d sb = camera.Project(b);
  const Eigen::Vector2d sc = camera.Project(c);
  const double min_x = std::min({sa.x(), sb.x(), sc.x()});
  const double max_x = std::max({sa.x(), sb.x(), sc.x()});
  const double min_y = std::min({sa.y(), sb.y(), sc.y()});
  const double max_y = std::max({sa.y(), sb.y(), sc.y()});
  const int u0 = std::max(0, ClampToPixel(std::floor(min_x - 0.5), camera.Width()));
  const int u1 = std::min(camera.Width() - 1,
                          ClampToPixel(std::ceil(max_x - 0.5), camera.Width()));
  const int v0 = std::max(0, ClampToPixel(std::floor(min_y - 0.5), camera.Height()));
  const int v1 = std::min(camera.Height() - 1,
                          ClampToPixel(std::ceil(max_y - 0.5), camera.Height()));

  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      const Eigen::Vector3d ray = camera.PixelRay(u, v);
      if (ray.dot(e0) < 0.0 || ray.dot(e1) < 0.0 || ray.dot(e2) < 0.0) {
        continue;
      }
      const double z = offset / normal.dot(ray);
      if (z > 0.0 && std::isfinite(z)) zbuf->Write(u, v, z);
    }
  }
}

}  // namespace

void TriangleMesh::Validate() const {
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw ValidationError("mesh vertex is not finite");
  }
  for (const auto& t : triangles) {
    for (uint32_t idx : t) {
      if (idx >= vertices.size()) {
        throw ValidationError("mesh triangle index " + std::to_string(idx) +
                              " out of range");
      }
    }
  }
}

size_t TriangleMesh::CountDegenerate() const {
  size_t n = 0;
  for (const auto& t : triangles) {
    const Eigen::Vector3d e1 = vertices[t[1]] - vertices[t[0]];
    const Eigen::Vector3d e2 = vertices[t[2]] - vertices[t[0]];
    if (0.5 * e1.cross(e2).norm() <= kDegenerateArea) ++n;
  }
  return n;
}

RenderedDepth RenderPointDepth(const PointCloud& cloud,
                               const CameraModel& camera, const ViewPose& pose,
                               int splat_radius) {
  if (splat_radius < 0) {
    throw ValidationError("splat radius must be non-negative");
  }
  ZBuffer zbuf(camera.Width(), camera.Height());
  const double w = camera.Width();
  const double h = camera.Height();
  for (const auto& p : cloud) {
    const Eigen::Vector3d pc = pose.WorldToCamera(p);
    if (!(pc.z() > 0.0) || !pc.allFinite()) continue;
    const Eigen::Vector2d uv = camera.Project(pc);
    if (!(uv.x() >= -splat_radius - 1.0 && uv.x() < w + splat_radius + 1.0 &&
          uv.y() >= -splat_radius - 1.0 && uv.y() < h + splat_radius + 1.0)) {
      continue;
    }
    const int cu = static_cast<int>(std::floor(uv.x()));
    const int cv = static_cast<int>(std::floor(uv.y()));
    for (int v = cv - splat_radius; v <= cv + splat_radius; ++v) {
      if (v < 0 || v >= camera.Height()) continue;
      for (int u = cu - splat_radius; u <= cu + splat_radius; ++u) {
        if (u < 0 || u >= camera.Width()) continue;
        zbuf.Write(u, v, pc.z());
      }
    }
  }
  return zbuf.Finish();
}

RenderedDepth RasterizeMeshDepth(const TriangleMesh& mesh,
                                 const CameraModel& camera,
                                 const ViewPose& pose) {
  mesh.Validate();
  ZBuffer zbuf(camera.Width(), camera.Height());
  std::vector<Eigen::Vector3d> poly(3);
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d& wa = mesh.vertices[t[0]];
    const Eigen::Vector3d& wb = mesh.vertices[t[1]];
    const Eigen::Vector3d& wc = mesh.vertices[t[2]];
    if (0.5 * (wb - wa).cross(wc - wa).norm() <= kDegenerateArea) continue;
    poly[0] = pose.WorldToCamera(wa);
    poly[1] = pose.WorldToCamera(wb);
    poly[2] = pose.WorldToCamera(wc);
    if (poly[0].z() >= kNearPlane && poly[1].z() >= kNearPlane &&
        poly[2].z() >= kNearPlane) {
      RasterizeTriangle(poly[0], poly[1], poly[2], camera, &zbuf);
      continue;
    }
    const std::vector<Eigen::Vector3d> clipped = ClipNear(poly);
    for (size_t k = 1; k + 1 < clipped.size(); ++k) {
      RasterizeTriangle(clipped[0], clipped[k], clipped[k + 1], camera, &zbuf);
    }
  }
  return zbuf.Finish();
}

PointCloud Unproject(const DepthMap& depth, const CameraModel& camera,
                     const ViewPose& pose, const Mask& mask) {
  if (depth.width != camera.Width() || depth.height != camera.Height() ||
      mask.width != depth.width || mask.height != depth.height ||
      depth.Size() != mask.Size()) {
    throw ValidationError("unproject: depth, mask and camera sizes differ");
  }
  PointCloud out;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!mask.At(u, v)) continue;
      const double d = depth.At(u, v);
      if (!(d > 0.0)) continue;
      out.push_back(pose.CameraToWorld(d * camera.PixelRay(u, v)));
    }
  }
  return out;
}

RenderedDepth FilterDepthOutliers(const RenderedDepth& lidar,
                                  const RenderedDepth& mesh,
                                  const OutlierFilterParams& params) {
  const size_t n = lidar.depth.Size();
  if (lidar.depth.width != mesh.depth.width ||
      lidar.depth.height != mesh.depth.height || mesh.depth.Size() != n ||
      lidar.mask.Size() != n || mesh.mask.Size() != n) {
    throw ValidationError("outlier filter: LiDAR and mesh maps differ in size");
  }
  if (!(params.rel_tol >= 0.0) || !(params.abs_tol >= 0.0)) {
    throw ValidationError("outlier filter tolerances must be non-negative");
  }
  RenderedDepth out{DepthMap(lidar.depth.width, lidar.depth.height),
                    Mask(lidar.depth.width, lidar.depth.height)};
  out.depth.camera_id = lidar.depth.camera_id;
  for (size_t i = 0; i < n; ++i) {
    if (!lidar.mask.values[i]) continue;
    const double d_lidar = lidar.depth.values[i];
    bool keep = true;
    if (mesh.mask.values[i]) {
      const double d_mesh = mesh.depth.values[i];
      keep = std::abs(d_lidar - d_mesh) <=
             std::max(params.abs_tol, params.rel_tol * d_mesh);
    }
    if (keep) {
      out.depth.values[i] = d_lidar;
      out.mask.values[i] = 255;
    }
  }
  return out;
}

}  // namespace uavgeo
