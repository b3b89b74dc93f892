#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels_common.hpp"
#include "tempostyle/kernels.hpp"

namespace tempostyle::kernels {

void rasterize_coverage(std::span<const Point2> polygon, int height, int width, int ss,
                        std::span<float> out) {
  if (out.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("rasterize_coverage: output size mismatch");
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out[static_cast<std::size_t>(y) * width + x] = detail::pixel_coverage(polygon, x, y, ss);
    }
  }
}

std::vector<CoverageMoments> coverage_moments(std::span<const float> frames, int64_t n_frames,
                                              int height, int width) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  std::vector<CoverageMoments> out(static_cast<std::size_t>(n_frames));
#pragma omp parallel for schedule(static)
  for (int64_t f = 0; f < n_frames; ++f) {
    const float* r = frames.data() + static_cast<std::size_t>(f) * 3 * plane;
    const float* g = r + plane;
    const float* b = g + plane;
    double mass = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sr = 0, sg = 0, sb = 0;
    for (int y = 0; y < height; ++y) {
      const double py = y + 0.5;
      for (int x = 0; x < width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        const double c = detail::coverage_of(r[i], g[i], b[i]);
        const double px = x + 0.5;
        mass += c;
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
    CoverageMoments mo;
    mo.mass = mass;
    if (mass > 0) {
      mo.cx = sx / mass;
      mo.cy = sy / mass;
      mo.mu20 = sxx / mass - mo.cx * mo.cx;
      mo.mu11 = sxy / mass - mo.cx * mo.cy;
      mo.mu02 = syy / mass - mo.cy * mo.cy;
      mo.r = sr / mass;
      mo.g = sg / mass;
      mo.b = sb / mass;
    }
    out[static_cast<std::size_t>(f)] = mo;
  }
  return out;
}

std::vector<double> pairwise_pearson(std::span<const double> series, int64_t n, int64_t length) {
  // Standardize each series once, then every coefficient is a dot product.
  std::vector<double> z(static_cast<std::size_t>(n * length));
  std::vector<char> valid(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const double* a = series.data() + i * length;
    double m = 0;
    for (int64_t t = 0; t < length; ++t) m += a[t];
    m /= length;
    double ss = 0;
    for (int64_t t = 0; t < length; ++t) ss += (a[t] - m) * (a[t] - m);
    valid[i] = ss > 0;
    const double inv = ss > 0 ? 1.0 / std::sqrt(ss) : 0.0;
    for (int64_t t = 0; t < length; ++t) z[i * length + t] = (a[t] - m) * inv;
  }
  std::vector<double> out(static_cast<std::size_t>(n * n));
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      if (!valid[i] || !valid[j]) {
        out[i * n + j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double s = 0;
      for (int64_t t = 0; t < length; ++t) s += z[i * length + t] * z[j * length + t];
      out[i * n + j] = s;
    }
  }
  return out;
}

MeanCov mean_covariance(std::span<const double> x, int64_t n, int64_t dim) {
  MeanCov r;
  r.mean.assign(static_cast<std::size_t>(dim), 0.0);
  r.cov.assign(static_cast<std::size_t>(dim * dim), 0.0);
#pragma omp parallel for schedule(static)
  for (int64_t d = 0; d < dim; ++d) {
    double s = 0;
    for (int64_t i = 0; i < n; ++i) s += x[i * dim + d];
    r.mean[d] = s / static_cast<double>(n);
  }
#pragma omp parallel for schedule(dynamic)
  for (int64_t a = 0; a < dim; ++a) {
    for (int64_t b = a; b < dim; ++b) {
      double s = 0;
      for (int64_t i = 0; i < n; ++i) s += (x[i * dim + a] - r.mean[a]) * (x[i * dim + b] - r.mean[b]);
      const double v = n > 1 ? s / static_cast<double>(n - 1) : 0.0;
      r.cov[a * dim + b] = v;
      r.cov[b * dim + a] = v;
    }
  }
  return r;
}

}  // namespace tempostyle::kernels
