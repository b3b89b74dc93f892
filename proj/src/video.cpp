#include "tempostyle/video.hpp"

#include <cmath>

#include "tempostyle/errors.hpp"

namespace tempostyle {

void VideoClip::validate() const {
  if (!frames.defined()) throw ShapeError("clip has no frame tensor");
  if (frames.dim() != 4 || frames.size(1) != 3) throw ShapeError("clip frames must be [T, 3, H, W]");
  if (frames.size(0) != length()) {
    throw ShapeError("clip has " + std::to_string(frames.size(0)) + " frames but " +
                     std::to_string(length()) + " time-points");
  }
  if (!landmarks.empty() && static_cast<int64_t>(landmarks.size()) != length()) {
    throw ShapeError("clip landmarks must be empty or one per frame");
  }
  for (std::size_t i = 0; i < timepoints.size(); ++i) {
    if (!std::isfinite(timepoints[i])) throw DomainError("clip time-point is not finite");
    if (i > 0 && !(timepoints[i] > timepoints[i - 1])) {
      throw DomainError("clip time-points must be strictly increasing");
    }
  }
}

}  // namespace tempostyle
