#pragma once

// Data-parallel kernels outside the autograd graph. Each kernel has an OpenMP
// version and a serial reference (suffix _serial) that the tests compare against.

#include <cstdint>
#include <span>
#include <vector>

#include "tempostyle/geometry.hpp"

namespace tempostyle::kernels {

/// Fraction of ss x ss subsamples of each pixel inside the polygon (even-odd rule).
/// out is row-major [height, width].
void rasterize_coverage(std::span<const Point2> polygon, int height, int width, int ss,
                        std::span<float> out);
void rasterize_coverage_serial(std::span<const Point2> polygon, int height, int width, int ss,
                               std::span<float> out);

/// Raw and central image moments of a coverage map.
struct CoverageMoments {
  double mass = 0.0;  // sum of coverage
  double cx = 0.0, cy = 0.0;
  double mu20 = 0.0, mu11 = 0.0, mu02 = 0.0;  // normalized by mass
  double r = 0.0, g = 0.0, b = 0.0;           // coverage-weighted mean color
};

/// Foreground coverage of an RGB frame in [-1, 1]: clamp((max channel + 1) / 2, 0, 1).
/// frames is [n_frames, 3, height, width] contiguous.
std::vector<CoverageMoments> coverage_moments(std::span<const float> frames, int64_t n_frames,
                                              int height, int width);
std::vector<CoverageMoments> coverage_moments_serial(std::span<const float> frames,
                                                     int64_t n_frames, int height, int width);

/// Pearson coefficients between all pairs of n equal-length series (row-major
/// [n, length]). Entry (i, j) is NaN when either series has zero variance.
std::vector<double> pairwise_pearson(std::span<const double> series, int64_t n, int64_t length);
std::vector<double> pairwise_pearson_serial(std::span<const double> series, int64_t n,
                                            int64_t length);

/// Column mean and unbiased covariance (divisor n - 1) of a row-major [n, dim] matrix.
struct MeanCov {
  std::vector<double> mean;
  std::vector<double> cov;  // [dim, dim]
};
MeanCov mean_covariance(std::span<const double> x, int64_t n, int64_t dim);
MeanCov mean_covariance_serial(std::span<const double> x, int64_t n, int64_t dim);

}  // namespace tempostyle::kernels
