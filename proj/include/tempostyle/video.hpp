#pragma once

#include <torch/torch.h>

#include <optional>
#include <vector>

#include "tempostyle/conditional_content.hpp"
#include "tempostyle/geometry.hpp"

namespace tempostyle {

/// One frame: pixels [3, H, W] in [-1, 1] at real time-point t.
struct Frame {
  torch::Tensor pixels;
  double t = 0.0;
};

/// Ordered frames with their time-points. frames is [T, 3, H, W] float32.
struct VideoClip {
  torch::Tensor frames;
  std::vector<double> timepoints;
  std::optional<ConditionLabel> label;
  std::vector<LandmarkPolygon> landmarks;  // empty or one per frame

  int64_t length() const { return static_cast<int64_t>(timepoints.size()); }
  Frame frame(int64_t i) const { return Frame{frames[i], timepoints[static_cast<std::size_t>(i)]}; }
  /// Throws ShapeError/DomainError when frames, time-points and landmarks disagree
  /// or time-points are not strictly increasing.
  void validate() const;
};

}  // namespace tempostyle
