#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uavgeo/geometry.h"

namespace uavgeo {

// Axis-aligned ground rectangle [0, x_extent] x [0, y_extent] at
// z = ground_elevation. World frame is right-handed with +z up; +x is east
// and +y is north.
struct RegionSpec {
  double x_extent = 0.0;
  double y_extent = 0.0;
  double ground_elevation = 0.0;

  void Validate() const;
};

struct ImageSize {
  int width = 518;
  int height = 518;
};

enum class ViewTag { kNadir, kObliqueNorth, kObliqueEast, kObliqueSouth,
                     kObliqueWest };

std::string ViewTagName(ViewTag tag);

struct PlannedView {
  std::string image_id;
  CameraModel camera;
  ViewPose pose;
  ViewTag tag = ViewTag::kNadir;
  int line = 0;
  int station = 0;  // index along the serpentine trajectory
};

struct FlightPlan {
  std::vector<PlannedView> views;
  double hfov = 0.0;      // degrees
  double altitude = 0.0;  // meters above ground
  double forward_overlap = 0.0;
  double side_overlap = 0.0;
  double tilt = 0.0;      // degrees; 0 for nadir-only plans
  double footprint_across = 0.0;
  double footprint_along = 0.0;
  double line_spacing = 0.0;
  double station_spacing = 0.0;
  int num_lines = 0;
  int stations_per_line = 0;
  // Set when an FA altitude was clamped into its limits.
  bool clamped = false;
};

// Serpentine lawnmower grid of nadir views. Lines run along x and are spaced
// along y; the heading alternates by 180 degrees between lines. The image
// width spans the across-track direction.
FlightPlan PlanNadirGrid(const RegionSpec& region, double altitude,
                         double hfov_deg, double forward_overlap,
                         double side_overlap, const ImageSize& image = {});

// Five views per nadir-grid station: nadir plus four views tilted by tilt_deg
// toward +y, +x, -y and -x.
FlightPlan PlanObliqueRig(const RegionSpec& region, double altitude,
                          double hfov_deg, double tilt_deg,
                          double forward_overlap, double side_overlap,
                          const ImageSize& image = {});

struct AltitudeLimits {
  double min = 40.0;
  double max = 210.0;
};

// Controlled HFOV-height groups: one nadir plan per HFOV, each flown at the
// altitude giving the same across-track footprint, all sharing one station
// pattern. Throws OutOfRangeError naming the HFOV whose altitude falls outside
// the limits unless clamp is set, in which case the altitude is clamped and
// the plan flagged.
std::vector<FlightPlan> GenFaGroups(const RegionSpec& region,
                                    const std::vector<double>& hfovs_deg,
                                    double target_footprint,
                                    const AltitudeLimits& limits,
                                    double forward_overlap,
                                    double side_overlap,
                                    const ImageSize& image = {},
                                    bool clamp = false);

// Rotation of a downward-looking camera whose image top points along the
// horizontal heading (radians from +x toward +y).
Eigen::Matrix3d NadirRotation(double heading_rad);

}  // namespace uavgeo
