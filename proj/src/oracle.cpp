#include "tempostyle/oracle.hpp"

#include <cmath>
#include <complex>
#include <span>

#include "tempostyle/errors.hpp"
#include "tempostyle/kernels.hpp"

namespace tempostyle {

void NearestCentroid::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes) {
  if (x.rows() != static_cast<Eigen::Index>(y.size()) || x.rows() == 0) {
    throw DomainError("NearestCentroid: need one label per sample");
  }
  mean_ = x.colwise().mean().transpose();
  Eigen::MatrixXd c = x.rowwise() - mean_.transpose();
  scale_ = (c.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt().transpose();
  for (Eigen::Index i = 0; i < scale_.size(); ++i) {
    if (!(scale_[i] > 1e-12)) scale_[i] = 1.0;
  }
  centroids_ = Eigen::MatrixXd::Zero(n_classes, x.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int cls = y[static_cast<std::size_t>(i)];
    if (cls < 0 || cls >= n_classes) throw LookupError("NearestCentroid: label out of range");
    centroids_.row(cls) += (c.row(i).transpose().array() / scale_.array()).matrix().transpose();
    counts[cls] += 1;
  }
  for (int k = 0; k < n_classes; ++k) {
    if (counts[k] == 0) throw DomainError("NearestCentroid: class without samples");
    centroids_.row(k) /= counts[k];
  }
}

int NearestCentroid::predict(const Eigen::VectorXd& x) const {
  if (!fitted()) throw DomainError("NearestCentroid: not fitted");
  const Eigen::VectorXd z = ((x - mean_).array() / scale_.array()).matrix();
  Eigen::Index best = 0;
  (centroids_.rowwise() - z.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

namespace {

std::vector<kernels::CoverageMoments> clip_moments(const VideoClip& clip) {
  auto f = clip.frames.to(torch::kFloat32).contiguous();
  if (f.dim() != 4 || f.size(1) != 3) throw ShapeError("oracle: frames must be [T, 3, H, W]");
  return kernels::coverage_moments(
      std::span<const float>(f.data_ptr<float>(), static_cast<std::size_t>(f.numel())), f.size(0),
      static_cast<int>(f.size(2)), static_cast<int>(f.size(3)));
}

double stddev(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double mean(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

Eigen::VectorXd action_features(const VideoClip& clip) {
  const auto mom = clip_moments(clip);
  if (mom.size() < 2) throw DomainError("action_features: need at least 2 frames");
  const double res = static_cast<double>(clip.frames.size(3));
  std::vector<double> cx, cy, mass, aniso, dvec;
  std::vector<std::complex<double>> a;
  for (const auto& m : mom) {
    cx.push_back(m.cx / res);
    cy.push_back(m.cy / res);
    mass.push_back(m.mass);
    const double tr = m.mu20 + m.mu02;
    const std::complex<double> z = tr > 0 ? std::complex<double>(m.mu20 - m.mu02, 2 * m.mu11) / tr
                                          : std::complex<double>(0, 0);
    a.push_back(z);
    aniso.push_back(std::abs(z));
  }
  for (std::size_t i = 1; i < a.size(); ++i) dvec.push_back(std::abs(a[i] - a[i - 1]));
  const double mm = mean(mass);
  Eigen::VectorXd f(6);
  f << stddev(cx), stddev(cy), mm > 0 ? stddev(mass) / mm : 0.0, mean(aniso), mean(dvec), stddev(aniso);
  return f;
}

Eigen::VectorXd identity_features(const VideoClip& clip) {
  const auto mom = clip_moments(clip);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
  double w = 0;
  for (const auto& m : mom) {
    f += m.mass * Eigen::Vector3d(m.r, m.g, m.b);
    w += m.mass;
  }
  if (w > 0) f /= w;
  return f;
}

void OracleClassifier::fit(const std::vector<VideoClip>& clips, int n_actors, int n_actions) {
  Eigen::MatrixXd xa(clips.size(), 6), xi(clips.size(), 3);
  std::vector<int> ya, yi;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!clips[i].label) throw DomainError("oracle: training clips must be labelled");
    xa.row(i) = action_features(clips[i]).transpose();
    xi.row(i) = identity_features(clips[i]).transpose();
    ya.push_back(clips[i].label->action_id);
    yi.push_back(clips[i].label->actor_id);
  }
  action_.fit(xa, ya, n_actions);
  actor_.fit(xi, yi, n_actors);
}

int OracleClassifier::predict_action(const VideoClip& clip) const {
  return action_.predict(action_features(clip));
}

int OracleClassifier::predict_actor(const VideoClip& clip) const {
  return actor_.predict(identity_features(clip));
}

double OracleClassifier::action_accuracy(const std::vector<VideoClip>& clips) const {
  if (clips.empty()) throw DomainError("oracle: no clips to score");
  int ok = 0;
  for (const auto& c : clips) {
    if (!c.label) throw DomainError("oracle: clips must be labelled");
    ok += predict_action(c) == c.label->action_id;
  }
  return static_cast<double>(ok) / static_cast<double>(clips.size());
}

double OracleClassifier::actor_accuracy(const std::vector<VideoClip>& clips) const {
  if (clips.empty()) throw DomainError("oracle: no clips to score");
  int ok = 0;
  for (const auto& c : clips) {
    if (!c.label) throw DomainError("oracle: clips must be labelled");
    ok += predict_actor(c) == c.label->actor_id;
  }
  return static_cast<double>(ok) / static_cast<double>(clips.size());
}

}  // namespace tempostyle
