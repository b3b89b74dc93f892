#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempostyle/geometry.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

/// |shoelace sum| / 2. Throws DomainError for fewer than 3 points.
double polygon_area(const LandmarkPolygon& poly);

/// Supplies one landmark polygon per frame, or nothing when detection fails.
class LandmarkProvider {
 public:
  virtual ~LandmarkProvider() = default;
  virtual std::optional<LandmarkPolygon> locate(const VideoClip& clip, int64_t index) const = 0;
  virtual std::string id() const = 0;
};

/// Uses the analytic polygons stored with synthetic clips.
class StoredLandmarks final : public LandmarkProvider {
 public:
  std::optional<LandmarkPolygon> locate(const VideoClip& clip, int64_t index) const override;
  std::string id() const override { return "stored"; }
};

/// Image-based provider for rendered or generated frames: estimates foreground
/// coverage from the brightest channel, then traces the iso-coverage contour along
/// rays cast from the coverage centroid.
class CoverageContourLandmarks final : public LandmarkProvider {
 public:
  explicit CoverageContourLandmarks(int n_rays = 120, double level = 0.5, double min_mass = 4.0);
  std::optional<LandmarkPolygon> locate(const VideoClip& clip, int64_t index) const override;
  std::string id() const override { return "coverage-contour"; }

 private:
  int n_rays_;
  double level_;
  double min_mass_;
};

/// Per-frame polygon-area series of a clip.
struct MotionSignal {
  std::vector<double> values;
  std::vector<bool> interpolated;  // true where the provider failed
  std::string source;

  bool any_interpolated() const;
};

/// Failed frames are filled by linear interpolation from valid neighbours and flagged.
/// Throws DomainError when no frame yields a polygon.
MotionSignal motion_signal(const VideoClip& clip, const LandmarkProvider& provider);

/// Pearson coefficient; std::nullopt ("undefined") when either series is constant.
/// Throws DomainError for unequal lengths or fewer than 2 samples.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct PairwiseCorrelation {
  double mean = 0.0;       // NaN when no pair is defined
  int64_t n_pairs = 0;     // defined pairs in the mean
  int64_t n_undefined = 0; // pairs skipped (constant series)
};

/// Mean Pearson coefficient over all unordered pairs, skipping undefined ones.
/// Series are truncated to the shortest length.
PairwiseCorrelation mean_pairwise_correlation(const std::vector<MotionSignal>& signals);

/// Gaussian fit of clip-level features.
struct FeatureSet {
  Eigen::MatrixXd samples;  // [n, dim]
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  static FeatureSet from_samples(const Eigen::MatrixXd& samples);
  static FeatureSet from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov);
};

/// ||muA - muB||^2 + Tr(SA + SB - 2 (SA SB)^(1/2)). The matrix square root uses symmetric
/// eigendecompositions; eigenvalues in [-1e-8, 0) are clipped to zero and anything more
/// negative raises DomainError.
double frechet_distance(const FeatureSet& a, const FeatureSet& b);

struct PcaResult {
  Eigen::MatrixXd components;          // [dim, r], columns by decreasing variance
  Eigen::MatrixXd projections;         // [T, r]
  Eigen::VectorXd explained_variance;  // [r]
  Eigen::VectorXd explained_ratio;     // [r]
};

/// Centered PCA of a latent trajectory [T, dim].
PcaResult pca_trajectory(const Eigen::MatrixXd& latents);

/// (2/T) (int cos(i pi t / T) p(t) dt)^2 / int p(t)^2 dt on t in [0, T], with the
/// samples of p placed uniformly and both integrals taken by the trapezoid rule.
/// Throws DomainError for zero energy, i < 1, or fewer than 2 samples.
double cosine_content(std::span<const double> p, int i);

}  // namespace tempostyle
