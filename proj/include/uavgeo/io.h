#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "uavgeo/depth_render.h"
#include "uavgeo/geometry.h"
#include "uavgeo/image.h"

namespace uavgeo {

// One line of a camera file:
//   image_id w h fx fy cx cy qw qx qy qz tx ty tz
// (q, t) is world-from-camera with t the camera center. The quaternion is kept
// exactly as read so a write-read-write cycle is byte-stable.
struct CameraRecord {
  std::string image_id;
  CameraModel camera{1, 1, 1.0, 1.0, 0.5, 0.5};
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();

  static CameraRecord FromPose(std::string image_id, const CameraModel& camera,
                               const ViewPose& pose);
  ViewPose Pose() const;
};

// 17 significant digits, enough to round-trip any double.
std::string FormatDouble(double value);

std::vector<CameraRecord> ReadCameras(const std::filesystem::path& path);
void WriteCameras(const std::filesystem::path& path,
                  const std::vector<CameraRecord>& records);
// Parses the camera text format from memory; `source` names it in errors.
std::vector<CameraRecord> ParseCameras(const std::string& text,
                                       const std::string& source);
std::string SerializeCameras(const std::vector<CameraRecord>& records);

// Binary little-endian PLY. Reads float32 or float64 x/y/z and ignores other
// vertex properties; writes float64 x/y/z only.
PointCloud ReadPointCloud(const std::filesystem::path& path);
void WritePointCloud(const std::filesystem::path& path,
                     const PointCloud& cloud);

// Binary little-endian PLY with a vertex element and a face element holding a
// vertex_indices list. Polygons with more than three corners are fanned.
TriangleMesh ReadMesh(const std::filesystem::path& path);
void WriteMesh(const std::filesystem::path& path, const TriangleMesh& mesh);

// Grayscale little-endian PFM, rows stored bottom-up. Zero marks an invalid
// pixel; non-finite or negative stored values also load as 0.
DepthMap ReadDepth(const std::filesystem::path& path);
void WriteDepth(const std::filesystem::path& path, const DepthMap& depth);

// Binary PGM (P5). Written as 0 / 255; any nonzero byte reads as valid.
Mask ReadMask(const std::filesystem::path& path);
void WriteMask(const std::filesystem::path& path, const Mask& mask);

struct ManifestView {
  std::string image_id;
  std::string camera_file;
  std::string depth_file;
  std::string mask_file;
  std::string split = "test";          // train | test
  std::string acquisition = "nadir";   // nadir | oblique | manual
};

struct SceneMetadata {
  double voxel_size = 0.25;
  std::optional<double> gsd;
  std::optional<double> altitude;
  std::optional<double> hfov;
};

// Per-scene JSON manifest. File references are relative to base_dir.
struct SceneManifest {
  int schema_version = 1;
  std::string scene_id;
  std::string dataset;  // defaults to scene_id
  std::vector<ManifestView> views;
  std::optional<std::string> gt_cloud;
  SceneMetadata metadata;
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const std::string& ref) const;
};

constexpr int kManifestSchemaVersion = 1;

// Validates the schema, id uniqueness and that every referenced file exists.
SceneManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const SceneManifest& manifest);

struct PredictionViewRef {
  std::string image_id;
  std::optional<std::string> depth_file;
  // Row-major point map PLY with width * height vertices; NaN marks invalid.
  std::optional<std::string> points_file;
};

// Predictions of one model run. Cameras hold predicted intrinsics and poses.
struct PredictionManifest {
  int schema_version = 1;
  std::string model;
  std::string input_mode = "rgb";
  std::string camera_file;
  // When false the predicted intrinsics are ignored and ray error uses rays
  // from the predicted point map.
  bool has_intrinsics = true;
  std::vector<PredictionViewRef> views;
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const std::string& ref) const;
};

PredictionManifest ReadPredictionManifest(const std::filesystem::path& path);
void WritePredictionManifest(const std::filesystem::path& path,
                             const PredictionManifest& manifest);

// Whole-file helpers shared by the readers.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, const std::string& data);

}  // namespace uavgeo
