#include "tempostyle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tempostyle/errors.hpp"
#include "tempostyle/kernels.hpp"

namespace tempostyle {

double polygon_area(const LandmarkPolygon& poly) {
  const auto& p = poly.points;
  if (p.size() < 3) throw DomainError("polygon_area: need at least 3 points");
  double s = 0.0;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    s += p[j].x * p[i].y - p[i].x * p[j].y;
  }
  return std::abs(s) * 0.5;
}

std::optional<LandmarkPolygon> StoredLandmarks::locate(const VideoClip& clip, int64_t index) const {
  if (index < 0 || index >= static_cast<int64_t>(clip.landmarks.size())) return std::nullopt;
  const auto& poly = clip.landmarks[static_cast<std::size_t>(index)];
  if (poly.points.size() < 3) return std::nullopt;
  return poly;
}

CoverageContourLandmarks::CoverageContourLandmarks(int n_rays, double level, double min_mass)
    : n_rays_(n_rays), level_(level), min_mass_(min_mass) {}

std::optional<LandmarkPolygon> CoverageContourLandmarks::locate(const VideoClip& clip,
                                                                int64_t index) const {
  auto frame = clip.frames[index].to(torch::kFloat32).contiguous();
  const int h = static_cast<int>(frame.size(1));
  const int w = static_cast<int>(frame.size(2));
  const float* px = frame.data_ptr<float>();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<double> cov(plane);
  double mass = 0, sx = 0, sy = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float m = std::max(px[i], std::max(px[plane + i], px[2 * plane + i]));
      const double c = std::clamp((m + 1.0) * 0.5, 0.0, 1.0);
      cov[i] = c;
      mass += c;
      sx += c * (x + 0.5);
      sy += c * (y + 0.5);
    }
  }
  if (mass < min_mass_) return std::nullopt;
  const double cx = sx / mass, cy = sy / mass;

  // Bilinear sample with pixel centers at +0.5 and zero coverage outside the frame.
  auto sample = [&](double x, double y) {
    const double fx = x - 0.5, fy = y - 0.5;
    const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0, ay = fy - y0;
    auto at = [&](int xx, int yy) {
      return (xx < 0 || yy < 0 || xx >= w || yy >= h) ? 0.0 : cov[static_cast<std::size_t>(yy) * w + xx];
    };
    return (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0)) +
           ay * ((1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1));
  };

  const double max_r = std::hypot(w, h);
  const double step = 0.05;
  LandmarkPolygon poly;
  for (int k = 0; k < n_rays_; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_rays_;
    const double dx = std::cos(a), dy = std::sin(a);
    // Outermost downward crossing of the level along the ray.
    double boundary = 0.0;
    double prev = sample(cx, cy);
    for (double r = step; r < max_r; r += step) {
      const double v = sample(cx + r * dx, cy + r * dy);
      if (prev >= level_ && v < level_) boundary = r - step + step * (prev - level_) / (prev - v);
      prev = v;
    }
    poly.points.push_back({cx + boundary * dx, cy + boundary * dy});
  }
  return poly;
}

bool MotionSignal::any_interpolated() const {
  return std::any_of(interpolated.begin(), interpolated.end(), [](bool b) { return b; });
}

MotionSignal motion_signal(const VideoClip& clip, const LandmarkProvider& provider) {
  MotionSignal sig;
  sig.source = provider.id();
  const int64_t n = clip.length();
  sig.values.assign(static_cast<std::size_t>(n), 0.0);
  sig.interpolated.assign(static_cast<std::size_t>(n), false);
  std::vector<int64_t> valid;
  for (int64_t i = 0; i < n; ++i) {
    auto poly = provider.locate(clip, i);
    if (poly && poly->points.size() >= 3) {
      sig.values[i] = polygon_area(*poly);
      valid.push_back(i);
    } else {
      sig.interpolated[i] = true;
    }
  }
  if (n > 0 && valid.empty()) throw DomainError("motion_signal: no frame produced landmarks");
  for (int64_t i = 0; i < n; ++i) {
    if (!sig.interpolated[i]) continue;
    auto hi = std::lower_bound(valid.begin(), valid.end(), i);
    if (hi == valid.begin()) {
      sig.values[i] = sig.values[*hi];
    } else if (hi == valid.end()) {
      sig.values[i] = sig.values[valid.back()];
    } else {
      const int64_t a = *(hi - 1), b = *hi;
      const double f = static_cast<double>(i - a) / static_cast<double>(b - a);
      sig.values[i] = (1 - f) * sig.values[a] + f * sig.values[b];
    }
  }
  return sig;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: series lengths differ");
  if (x.size() < 2) throw DomainError("pearson: need at least 2 samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0) || !(syy > 0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PairwiseCorrelation mean_pairwise_correlation(const std::vector<MotionSignal>& signals) {
  PairwiseCorrelation out;
  out.mean = std::numeric_limits<double>::quiet_NaN();
  if (signals.size() < 2) return out;
  std::size_t len = signals.front().values.size();
  for (const auto& s : signals) len = std::min(len, s.values.size());
  if (len < 2) throw DomainError("mean_pairwise_correlation: series shorter than 2 samples");
  const auto n = static_cast<int64_t>(signals.size());
  std::vector<double> flat;
  flat.reserve(signals.size() * len);
  for (const auto& s : signals) flat.insert(flat.end(), s.values.begin(), s.values.begin() + len);
  const auto r = kernels::pairwise_pearson(flat, n, static_cast<int64_t>(len));
  double sum = 0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = i + 1; j < n; ++j) {
      const double v = r[i * n + j];
      if (std::isnan(v)) {
        ++out.n_undefined;
      } else {
        sum += std::clamp(v, -1.0, 1.0);
        ++out.n_pairs;
      }
    }
  }
  if (out.n_pairs > 0) out.mean = sum / static_cast<double>(out.n_pairs);
  return out;
}

FeatureSet FeatureSet::from_samples(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2) throw DomainError("FeatureSet: need at least 2 samples");
  // Eigen is column-major; hand the kernel a row-major copy.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = samples;
  const auto stats = kernels::mean_covariance(
      std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())), rm.rows(), rm.cols());
  FeatureSet fs;
  fs.samples = samples;
  fs.mean = Eigen::Map<const Eigen::VectorXd>(stats.mean.data(), samples.cols());
  fs.cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      stats.cov.data(), samples.cols(), samples.cols());
  return fs;
}

FeatureSet FeatureSet::from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  FeatureSet fs;
  fs.mean = std::move(mean);
  fs.cov = std::move(cov);
  return fs;
}

namespace {

constexpr double kNegativeEigenTolerance = 1e-8;

Eigen::VectorXd checked_eigenvalues(const Eigen::VectorXd& ev, const char* what) {
  Eigen::VectorXd out = ev;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] < -kNegativeEigenTolerance) {
      throw DomainError(std::string("frechet_distance: ") + what + " is not positive semi-definite");
    }
    out[i] = std::max(out[i], 0.0);
  }
  return out;
}

}  // namespace

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows()) {
    throw DomainError("frechet_distance: feature dimensions differ");
  }
  const Eigen::MatrixXd sa = 0.5 * (a.cov + a.cov.transpose());
  const Eigen::MatrixXd sb = 0.5 * (b.cov + b.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
  const Eigen::VectorXd la = checked_eigenvalues(ea.eigenvalues(), "covariance A");
  checked_eigenvalues(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sb, Eigen::EigenvaluesOnly).eigenvalues(),
                      "covariance B");
  // Tr((SA SB)^(1/2)) = Tr((SA^(1/2) SB SA^(1/2))^(1/2)); the inner matrix is symmetric PSD.
  const Eigen::MatrixXd root_a = ea.eigenvectors() * la.cwiseSqrt().asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd li = checked_eigenvalues(ei.eigenvalues(), "product of covariances");
  const double tr_cross = li.cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_cross;
  return std::max(d, 0.0);
}

PcaResult pca_trajectory(const Eigen::MatrixXd& latents) {
  if (latents.rows() < 2) throw DomainError("pca_trajectory: need at least 2 time-points");
  const Eigen::RowVectorXd mean = latents.colwise().mean();
  const Eigen::MatrixXd centered = latents.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(latents.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::Index dim = cov.rows();
  PcaResult r;
  r.components.resize(dim, dim);
  r.explained_variance.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    // Eigen sorts ascending.
    r.components.col(i) = es.eigenvectors().col(dim - 1 - i);
    r.explained_variance[i] = std::max(es.eigenvalues()[dim - 1 - i], 0.0);
  }
  const double total = r.explained_variance.sum();
  r.explained_ratio = total > 0 ? Eigen::VectorXd(r.explained_variance / total)
                                : Eigen::VectorXd::Zero(dim);
  r.projections = centered * r.components;
  return r;
}

double cosine_content(std::span<const double> p, int i) {
  if (i < 1) throw DomainError("cosine_content: component order must be >= 1");
  if (p.size() < 2) throw DomainError("cosine_content: need at least 2 samples");
  const std::size_t n = p.size();
  const double T = 1.0;  // the ratio is invariant to the time scale
  const double dt = T / static_cast<double>(n - 1);
  double num = 0, energy = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double wgt = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    const double t = static_cast<double>(j) * dt;
    num += wgt * std::cos(i * std::numbers::pi * t / T) * p[j];
    energy += wgt * p[j] * p[j];
  }
  num *= dt;
  energy *= dt;
  if (!(energy > 0)) throw DomainError("cosine_content: series has zero energy");
  return std::clamp((2.0 / T) * num * num / energy, 0.0, 1.0);
}

}  // namespace tempostyle
