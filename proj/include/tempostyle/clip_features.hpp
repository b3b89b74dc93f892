#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "tempostyle/analysis.hpp"
#include "tempostyle/model.hpp"
#include "tempostyle/perceptual.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

/// Clip-level features for the Fréchet metric. Per-frame features f_i over the first
/// n_frames frames become [mean_i f_i, mean_i |f_{i+1} - f_i|].
class ClipFeatureExtractor {
 public:
  virtual ~ClipFeatureExtractor() = default;
  /// Per-frame features [T, d] for frames [T, 3, H, W].
  virtual torch::Tensor frame_features(const torch::Tensor& frames) const = 0;
  virtual std::string id() const = 0;

  /// Throws DomainError when the clip has fewer than n_frames frames (n_frames >= 2).
  Eigen::VectorXd clip_features(const VideoClip& clip, int64_t n_frames) const;
  FeatureSet feature_set(const std::vector<VideoClip>& clips, int64_t n_frames) const;
};

/// Global average pools of the last two layers of a seeded random conv stack.
class RandomConvClipExtractor final : public ClipFeatureExtractor {
 public:
  explicit RandomConvClipExtractor(uint64_t seed = 1234);
  torch::Tensor frame_features(const torch::Tensor& frames) const override;
  std::string id() const override;

 private:
  RandomConvBackbone backbone_;
};

/// Penultimate per-frame features of a trained D_t.
class TimeDiscriminatorClipExtractor final : public ClipFeatureExtractor {
 public:
  TimeDiscriminatorClipExtractor(VideoGAN model, std::string checkpoint_tag);
  torch::Tensor frame_features(const torch::Tensor& frames) const override;
  std::string id() const override;

 private:
  mutable VideoGAN model_;
  std::string tag_;
};

}  // namespace tempostyle
