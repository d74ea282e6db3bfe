#include "uavgeo/image.h"

#include <cmath>

#include "uavgeo/error.h"

namespace uavgeo {

Mask DepthMap::ValidMask() const {
  Mask mask(width, height);
  for (size_t i = 0; i < values.size(); ++i) {
    mask.values[i] = values[i] > 0.0 ? 255 : 0;
  }
  return mask;
}

void DepthMap::Validate() const {
  if (width < 0 || height < 0 ||
      values.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("depth map size does not match its dimensions");
  }
  for (double d : values) {
    if (!std::isfinite(d) || d < 0.0) {
      throw ValidationError("depth map holds a negative or non-finite value");
    }
  }
}

}  // namespace uavgeo
