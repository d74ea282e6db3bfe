#include "uavgeo/flight.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

constexpr double kCountEps = 1e-9;

struct Station {
  Eigen::Vector2d ground;
  double heading = 0.0;
  int line = 0;
};

struct StationGrid {
  std::vector<Station> stations;
  double line_spacing = 0.0;
  double station_spacing = 0.0;
  int num_lines = 0;
  int stations_per_line = 0;
};

void CheckOverlap(double overlap, const char* name) {
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1)");
  }
}

int CountPositions(double extent, double spacing) {
  return static_cast<int>(std::floor(extent / spacing + kCountEps)) + 1;
}

StationGrid BuildGrid(const RegionSpec& region, double across_footprint,
                      double along_footprint, double forward_overlap,
                      double side_overlap) {
  StationGrid grid;
  grid.line_spacing = across_footprint * (1.0 - side_overlap);
  grid.station_spacing = along_footprint * (1.0 - forward_overlap);
  grid.num_lines = CountPositions(region.y_extent, grid.line_spacing);
  grid.stations_per_line = CountPositions(region.x_extent, grid.station_spacing);
  for (int line = 0; line < grid.num_lines; ++line) {
    const bool reversed = line % 2 == 1;
    const double heading = reversed ? kPi : 0.0;
    for (int k = 0; k < grid.stations_per_line; ++k) {
      const int j = reversed ? grid.stations_per_line - 1 - k : k;
      grid.stations.push_back(
          {Eigen::Vector2d(j * grid.station_spacing, line * grid.line_spacing),
           heading, line});
    }
  }
  return grid;
}

std::string StationId(size_t station, ViewTag tag) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%05zu_", station);
  return buf + ViewTagName(tag);
}

FlightPlan PlanFromGrid(const RegionSpec& region, const StationGrid& grid,
                        double altitude, double hfov_deg,
                        double forward_overlap, double side_overlap,
                        double tilt_deg, const ImageSize& image) {
  const CameraModel camera =
      CameraModel::FromHfov(image.width, image.height, hfov_deg);
  FlightPlan plan;
  plan.hfov = hfov_deg;
  plan.altitude = altitude;
  plan.forward_overlap = forward_overlap;
  plan.side_overlap = side_overlap;
  plan.tilt = tilt_deg;
  plan.footprint_across = FootprintWidth(altitude, hfov_deg);
  plan.footprint_along = FootprintWidth(altitude, camera.Vfov());
  plan.line_spacing = grid.line_spacing;
  plan.station_spacing = grid.station_spacing;
  plan.num_lines = grid.num_lines;
  plan.stations_per_line = grid.stations_per_line;

  struct Tilt {
    ViewTag tag;
    Eigen::Vector3d toward;
  };
  const Tilt tilts[] = {
      {ViewTag::kObliqueNorth, Eigen::Vector3d::UnitY()},
      {ViewTag::kObliqueEast, Eigen::Vector3d::UnitX()},
      {ViewTag::kObliqueSouth, -Eigen::Vector3d::UnitY()},
      {ViewTag::kObliqueWest, -Eigen::Vector3d::UnitX()},
  };
  const Eigen::Vector3d down = -Eigen::Vector3d::UnitZ();

  for (size_t s = 0; s < grid.stations.size(); ++s) {
    const Station& st = grid.stations[s];
    const Eigen::Vector3d center(st.ground.x(), st.ground.y(),
                                 region.ground_elevation + altitude);
    const Eigen::Matrix3d nadir = NadirRotation(st.heading);
    plan.views.push_back({StationId(s, ViewTag::kNadir), camera,
                          ViewPose(nadir, center), ViewTag::kNadir, st.line,
                          static_cast<int>(s)});
    if (tilt_deg <= 0.0) continue;
    for (const Tilt& t : tilts) {
      const Eigen::Vector3d axis = down.cross(t.toward).normalized();
      const Eigen::Matrix3d tilt =
          Eigen::AngleAxisd(DegToRad(tilt_deg), axis).toRotationMatrix();
      plan.views.push_back({StationId(s, t.tag), camera,
                            ViewPose(tilt * nadir, center), t.tag, st.line,
                            static_cast<int>(s)});
    }
  }
  return plan;
}

}  // namespace

void RegionSpec::Validate() const {
  if (!(x_extent > 0.0) || !(y_extent > 0.0)) {
    throw DomainError("region extents must be positive");
  }
  if (!std::isfinite(ground_elevation)) {
    throw DomainError("ground elevation must be finite");
  }
}

std::string ViewTagName(ViewTag tag) {
  switch (tag) {
    case ViewTag::kNadir:
      return "nadir";
    case ViewTag::kObliqueNorth:
      return "oblique-N";
    case ViewTag::kObliqueEast:
      return "oblique-E";
    case ViewTag::kObliqueSouth:
      return "oblique-S";
    case ViewTag::kObliqueWest:
      return "oblique-W";
  }
  return "unknown";
}

Eigen::Matrix3d NadirRotation(double heading_rad) {
  const Eigen::Vector3d heading(std::cos(heading_rad), std::sin(heading_rad),
                                0.0);
  Eigen::Matrix3d r;
  r.col(1) = -heading;                     // image down points backwards
  r.col(2) = -Eigen::Vector3d::UnitZ();    // optical axis
  r.col(0) = r.col(1).cross(r.col(2));
  return r;
}

FlightPlan PlanNadirGrid(const RegionSpec& region, double altitude,
                         double hfov_deg, double forward_overlap,
                         double side_overlap, const ImageSize& image) {
  region.Validate();
  CheckOverlap(forward_overlap, "forward overlap");
  CheckOverlap(side_overlap, "side overlap");
  const CameraModel camera =
      CameraModel::FromHfov(image.width, image.height, hfov_deg);
  const double across = FootprintWidth(altitude, hfov_deg);
  const double along = FootprintWidth(altitude, camera.Vfov());
  const StationGrid grid =
      BuildGrid(region, across, along, forward_overlap, side_overlap);
  return PlanFromGrid(region, grid, altitude, hfov_deg, forward_overlap,
                      side_overlap, 0.0, image);
}

FlightPlan PlanObliqueRig(const RegionSpec& region, double altitude,
                          double hfov_deg, double tilt_deg,
                          double forward_overlap, double side_overlap,
                          const ImageSize& image) {
  if (!(tilt_deg > 0.0 && tilt_deg < 90.0)) {
    throw DomainError("oblique tilt must lie in (0, 90) degrees");
  }
  region.Validate();
  CheckOverlap(forward_overlap, "forward overlap");
  CheckOverlap(side_overlap, "side overlap");
  const CameraModel camera =
      CameraModel::FromHfov(image.width, image.height, hfov_deg);
  const double across = FootprintWidth(altitude, hfov_deg);
  const double along = FootprintWidth(altitude, camera.Vfov());
  const StationGrid grid =
      BuildGrid(region, across, along, forward_overlap, side_overlap);
  return PlanFromGrid(region, grid, altitude, hfov_deg, forward_overlap,
                      side_overlap, tilt_deg, image);
}

std::vector<FlightPlan> GenFaGroups(const RegionSpec& region,
                                    const std::vector<double>& hfovs_deg,
                                    double target_footprint,
                                    const AltitudeLimits& limits,
                                    double forward_overlap,
                                    double side_overlap,
                                    const ImageSize& image, bool clamp) {
  if (hfovs_deg.empty()) throw DomainError("HFOV list is empty");
  if (!(target_footprint > 0.0)) {
    throw DomainError("target footprint must be positive");
  }
  if (!(limits.min > 0.0) || !(limits.max >= limits.min)) {
    throw DomainError("altitude limits must satisfy 0 < min <= max");
  }
  region.Validate();
  CheckOverlap(forward_overlap, "forward overlap");
  CheckOverlap(side_overlap, "side overlap");
  if (image.width < 1 || image.height < 1) {
    throw DomainError("image size must be positive");
  }

  // Along-track footprint H * h / f equals target * h / w for every HFOV.
  const double along = target_footprint * image.height / image.width;
  const StationGrid grid = BuildGrid(region, target_footprint, along,
                                     forward_overlap, side_overlap);

  std::vector<FlightPlan> plans;
  plans.reserve(hfovs_deg.size());
  for (double hfov : hfovs_deg) {
    double altitude = AltitudeForFootprint(target_footprint, hfov);
    bool clamped = false;
    if (altitude < limits.min || altitude > limits.max) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "HFOV %.6g deg needs altitude %.6g m outside [%.6g, %.6g] m",
                    hfov, altitude, limits.min, limits.max);
      if (!clamp) throw OutOfRangeError(msg);
      std::clog << "warning: " << msg << "; clamping\n";
      altitude = std::clamp(altitude, limits.min, limits.max);
      clamped = true;
    }
    FlightPlan plan = PlanFromGrid(region, grid, altitude, hfov,
                                   forward_overlap, side_overlap, 0.0, image);
    plan.clamped = clamped;
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace uavgeo
