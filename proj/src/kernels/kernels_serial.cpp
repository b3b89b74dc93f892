#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels_common.hpp"
#include "tempostyle/kernels.hpp"

namespace tempostyle::kernels {

void rasterize_coverage_serial(std::span<const Point2> polygon, int height, int width, int ss,
                               std::span<float> out) {
  if (out.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("rasterize_coverage: output size mismatch");
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out[static_cast<std::size_t>(y) * width + x] = detail::pixel_coverage(polygon, x, y, ss);
    }
  }
}

std::vector<CoverageMoments> coverage_moments_serial(std::span<const float> frames,
                                                     int64_t n_frames, int height, int width) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  std::vector<CoverageMoments> out(static_cast<std::size_t>(n_frames));
  for (int64_t f = 0; f < n_frames; ++f) {
    const float* r = frames.data() + static_cast<std::size_t>(f) * 3 * plane;
    const float* g = r + plane;
    const float* b = g + plane;
    CoverageMoments mo;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sr = 0, sg = 0, sb = 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        const double c = detail::coverage_of(r[i], g[i], b[i]);
        const double px = x + 0.5, py = y + 0.5;
        mo.mass += c;
        sx += c * px;
        sy += c * py;
        sxx += c * px * px;
        sxy += c * px * py;
        syy += c * py * py;
        sr += c * r[i];
        sg += c * g[i];
        sb += c * b[i];
      }
    }
    if (mo.mass > 0) {
      mo.cx = sx / mo.mass;
      mo.cy = sy / mo.mass;
      mo.mu20 = sxx / mo.mass - mo.cx * mo.cx;
      mo.mu11 = sxy / mo.mass - mo.cx * mo.cy;
      mo.mu02 = syy / mo.mass - mo.cy * mo.cy;
      mo.r = sr / mo.mass;
      mo.g = sg / mo.mass;
      mo.b = sb / mo.mass;
    }
    out[static_cast<std::size_t>(f)] = mo;
  }
  return out;
}

std::vector<double> pairwise_pearson_serial(std::span<const double> series, int64_t n,
                                            int64_t length) {
  std::vector<double> out(static_cast<std::size_t>(n * n));
  auto row = [&](int64_t i) { return series.data() + i * length; };
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      const double* a = row(i);
      const double* b = row(j);
      double ma = 0, mb = 0;
      for (int64_t t = 0; t < length; ++t) {
        ma += a[t];
        mb += b[t];
      }
      ma /= length;
      mb /= length;
      double sab = 0, saa = 0, sbb = 0;
      for (int64_t t = 0; t < length; ++t) {
        sab += (a[t] - ma) * (b[t] - mb);
        saa += (a[t] - ma) * (a[t] - ma);
        sbb += (b[t] - mb) * (b[t] - mb);
      }
      out[static_cast<std::size_t>(i * n + j)] =
          (saa > 0 && sbb > 0) ? sab / std::sqrt(saa * sbb)
                               : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

MeanCov mean_covariance_serial(std::span<const double> x, int64_t n, int64_t dim) {
  MeanCov r;
  r.mean.assign(static_cast<std::size_t>(dim), 0.0);
  r.cov.assign(static_cast<std::size_t>(dim * dim), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t d = 0; d < dim; ++d) r.mean[d] += x[i * dim + d];
  }
  for (auto& m : r.mean) m /= static_cast<double>(n);
  for (int64_t a = 0; a < dim; ++a) {
    for (int64_t b = 0; b < dim; ++b) {
      double s = 0;
      for (int64_t i = 0; i < n; ++i) s += (x[i * dim + a] - r.mean[a]) * (x[i * dim + b] - r.mean[b]);
      r.cov[a * dim + b] = n > 1 ? s / static_cast<double>(n - 1) : 0.0;
    }
  }
  return r;
}

}  // namespace tempostyle::kernels
