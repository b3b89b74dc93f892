#pragma once

#include <vector>

namespace tempostyle {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Ordered 2-D landmark points in pixel coordinates (x right, y down, pixel centers at +0.5).
struct LandmarkPolygon {
  std::vector<Point2> points;
};

}  // namespace tempostyle
