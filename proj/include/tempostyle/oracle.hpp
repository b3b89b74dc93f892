#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "tempostyle/video.hpp"

namespace tempostyle {

/// Nearest class centroid on per-feature standardized inputs.
class NearestCentroid {
 public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes);
  int predict(const Eigen::VectorXd& x) const;
  bool fitted() const { return centroids_.size() > 0; }

 private:
  Eigen::VectorXd mean_, scale_;
  Eigen::MatrixXd centroids_;  // [n_classes, dim], standardized space
};

/// Motion descriptors of a clip from per-frame coverage moments: spread of the centroid
/// in x and y, relative area variation, mean anisotropy, mean frame-to-frame change of
/// the second-moment orientation vector, and spread of the anisotropy.
Eigen::VectorXd action_features(const VideoClip& clip);
/// Coverage-weighted mean foreground color.
Eigen::VectorXd identity_features(const VideoClip& clip);

/// Action and actor classifiers fitted on labelled real clips.
class OracleClassifier {
 public:
  void fit(const std::vector<VideoClip>& clips, int n_actors, int n_actions);
  int predict_action(const VideoClip& clip) const;
  int predict_actor(const VideoClip& clip) const;
  /// Fraction of labelled clips classified correctly.
  double action_accuracy(const std::vector<VideoClip>& clips) const;
  double actor_accuracy(const std::vector<VideoClip>& clips) const;

 private:
  NearestCentroid action_, actor_;
};

}  // namespace tempostyle
