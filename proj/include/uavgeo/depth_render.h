#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "uavgeo/geometry.h"
#include "uavgeo/image.h"

namespace uavgeo {

struct TriangleMesh {
  PointCloud vertices;
  std::vector<std::array<uint32_t, 3>> triangles;

  // Throws ValidationError on out-of-range indices or non-finite vertices.
  void Validate() const;
  // Number of triangles with area at or below 1e-12 m^2. Such triangles are
  // skipped by the rasterizer.
  size_t CountDegenerate() const;
};

// Depth rendering output: values plus the explicit valid mask.
struct RenderedDepth {
  DepthMap depth;
  Mask mask;
};

// Z-buffered point splatting. Each point in front of the camera covers the
// (2 r + 1)^2 pixel square around the pixel it projects into; each pixel
// keeps the smallest camera-frame depth.
RenderedDepth RenderPointDepth(const PointCloud& cloud,
                               const CameraModel& camera, const ViewPose& pose,
                               int splat_radius = 1);

// Perspective-correct triangle rasterization sampled at pixel centers, with
// near-plane clipping and no back-face culling.
RenderedDepth RasterizeMeshDepth(const TriangleMesh& mesh,
                                 const CameraModel& camera,
                                 const ViewPose& pose);

// World points for every valid pixel: pose applied to depth * (x, y, 1).
PointCloud Unproject(const DepthMap& depth, const CameraModel& camera,
                     const ViewPose& pose, const Mask& mask);

struct OutlierFilterParams {
  double rel_tol = 0.02;
  double abs_tol = 0.10;  // meters
};

// Keeps a LiDAR pixel where the mesh is invalid or
// |d_lidar - d_mesh| <= max(abs_tol, rel_tol * d_mesh). Output values are
// copied from the LiDAR map only.
RenderedDepth FilterDepthOutliers(const RenderedDepth& lidar,
                                  const RenderedDepth& mesh,
                                  const OutlierFilterParams& params = {});

}  // namespace uavgeo
