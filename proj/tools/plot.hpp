#pragma once

// Minimal line plots rendered straight into an RGB tensor for PNG output.

#include <torch/torch.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tempostyle/png_io.hpp"

namespace tempostyle::plot {

using Rgb = std::array<float, 3>;  // in [-1, 1]

inline const std::vector<Rgb>& palette() {
  static const std::vector<Rgb> p{{-1.0f, -0.3f, 0.6f}, {0.9f, -0.2f, -1.0f}, {-0.6f, 0.5f, -0.6f},
                                  {0.6f, -1.0f, -0.6f}, {0.2f, -0.5f, 0.8f}};
  return p;
}

class Canvas {
 public:
  Canvas(int width, int height) : w_(width), h_(height), img_(torch::ones({3, height, width})) {}

  void pixel(int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto a = img_.accessor<float, 3>();
    for (int ch = 0; ch < 3; ++ch) a[ch][y][x] = c[ch];
  }

  void line(double x0, double y0, double x1, double y1, const Rgb& c) {
    const int n = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int i = 0; i <= n; ++i) {
      const double f = static_cast<double>(i) / n;
      pixel(static_cast<int>(std::lround(x0 + f * (x1 - x0))), static_cast<int>(std::lround(y0 + f * (y1 - y0))), c);
    }
  }

  /// Each series is drawn over the full width, all sharing one symmetric y range.
  void series(const std::vector<std::vector<double>>& ys) {
    const int margin = 10;
    double lim = 1e-12;
    for (const auto& s : ys) {
      for (double v : s) lim = std::max(lim, std::abs(v));
    }
    const Rgb axis{-0.5f, -0.5f, -0.5f};
    line(margin, h_ / 2.0, w_ - margin, h_ / 2.0, axis);
    line(margin, margin, margin, h_ - margin, axis);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const auto& s = ys[k];
      const auto& c = palette()[k % palette().size()];
      for (std::size_t i = 1; i < s.size(); ++i) {
        auto px = [&](std::size_t j) { return margin + (w_ - 2.0 * margin) * j / (s.size() - 1.0); };
        auto py = [&](double v) { return h_ / 2.0 - (h_ / 2.0 - margin) * v / lim; };
        line(px(i - 1), py(s[i - 1]), px(i), py(s[i]), c);
      }
    }
  }

  void save(const std::string& path) const { write_png(path, img_); }

 private:
  int w_, h_;
  torch::Tensor img_;
};

}  // namespace tempostyle::plot
