#include "tempostyle/clip_features.hpp"

#include "tempostyle/errors.hpp"

namespace tempostyle {

Eigen::VectorXd ClipFeatureExtractor::clip_features(const VideoClip& clip, int64_t n_frames) const {
  if (n_frames < 2) throw DomainError("clip features need at least 2 frames");
  if (clip.length() < n_frames) {
    throw DomainError("clip has " + std::to_string(clip.length()) + " frames, need " +
                      std::to_string(n_frames));
  }
  torch::NoGradGuard guard;
  auto f = frame_features(clip.frames.narrow(0, 0, n_frames).to(torch::kFloat32)).to(torch::kFloat64);
  auto mean = f.mean(0);
  auto diff = (f.narrow(0, 1, n_frames - 1) - f.narrow(0, 0, n_frames - 1)).abs().mean(0);
  auto v = torch::cat({mean, diff}).contiguous();
  return Eigen::Map<const Eigen::VectorXd>(v.data_ptr<double>(), v.numel());
}

FeatureSet ClipFeatureExtractor::feature_set(const std::vector<VideoClip>& clips, int64_t n_frames) const {
  if (clips.size() < 2) throw DomainError("feature set needs at least 2 clips");
  Eigen::MatrixXd x;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    auto v = clip_features(clips[i], n_frames);
    if (i == 0) x.resize(static_cast<Eigen::Index>(clips.size()), v.size());
    x.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return FeatureSet::from_samples(x);
}

RandomConvClipExtractor::RandomConvClipExtractor(uint64_t seed) : backbone_(seed) {}

torch::Tensor RandomConvClipExtractor::frame_features(const torch::Tensor& frames) const {
  auto layers = backbone_.features(frames);
  const auto n = layers.size();
  return torch::cat({layers[n - 2].mean({2, 3}), layers[n - 1].mean({2, 3})}, 1);
}

std::string RandomConvClipExtractor::id() const { return "clip-" + backbone_.id(); }

TimeDiscriminatorClipExtractor::TimeDiscriminatorClipExtractor(VideoGAN model, std::string checkpoint_tag)
    : model_(std::move(model)), tag_(std::move(checkpoint_tag)) {
  if (!model_->dt) throw ConfigError("D_t feature extractor: model has no D_t");
}

torch::Tensor TimeDiscriminatorClipExtractor::frame_features(const torch::Tensor& frames) const {
  return model_->dt->frame_features(frames);
}

std::string TimeDiscriminatorClipExtractor::id() const { return "clip-dt-" + tag_; }

}  // namespace tempostyle
