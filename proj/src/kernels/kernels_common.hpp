#pragma once

#include <algorithm>
#include <span>

#include "tempostyle/geometry.hpp"

namespace tempostyle::kernels::detail {

inline bool inside(std::span<const Point2> poly, double x, double y) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

inline float pixel_coverage(std::span<const Point2> poly, int px, int py, int ss) {
  int hits = 0;
  for (int sy = 0; sy < ss; ++sy) {
    const double y = py + (sy + 0.5) / ss;
    for (int sx = 0; sx < ss; ++sx) {
      const double x = px + (sx + 0.5) / ss;
      hits += inside(poly, x, y) ? 1 : 0;
    }
  }
  return static_cast<float>(hits) / static_cast<float>(ss * ss);
}

inline float coverage_of(float r, float g, float b) {
  const float m = std::max(r, std::max(g, b));
  return std::clamp((m + 1.0f) * 0.5f, 0.0f, 1.0f);
}

}  // namespace tempostyle::kernels::detail
