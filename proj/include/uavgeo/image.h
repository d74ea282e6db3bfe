#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uavgeo {

// Row-major per-pixel flags; nonzero means valid.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> values;

  Mask() = default;
  Mask(int w, int h, uint8_t fill = 0)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  size_t Size() const { return values.size(); }
  bool At(int u, int v) const {
    return values[static_cast<size_t>(v) * width + u] != 0;
  }
  size_t CountValid() const {
    size_t n = 0;
    for (uint8_t m : values) n += m != 0;
    return n;
  }
  bool operator==(const Mask&) const = default;
};

// Row-major per-pixel depth along the camera z axis, in meters. Zero marks an
// invalid pixel; negative or non-finite values are rejected by Validate().
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::string camera_id;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w), height(h), values(static_cast<size_t>(w) * h, 0.0) {}

  size_t Size() const { return values.size(); }
  double& At(int u, int v) { return values[static_cast<size_t>(v) * width + u]; }
  double At(int u, int v) const {
    return values[static_cast<size_t>(v) * width + u];
  }

  // Mask of the pixels holding a positive depth.
  Mask ValidMask() const;
  // Throws ValidationError on negative or non-finite values or a size
  // mismatch.
  void Validate() const;
};

}  // namespace uavgeo
