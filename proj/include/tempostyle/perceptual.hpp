#pragma once

#include <torch/torch.h>

#include <memory>
#include <string>
#include <vector>

#include "tempostyle/video.hpp"

namespace tempostyle {

/// Frozen image feature stack used by the perceptual distance and the Fréchet metric.
class FeatureBackbone {
 public:
  virtual ~FeatureBackbone() = default;
  /// x [N, 3, H, W] in [-1, 1] -> one feature map per layer, each [N, C_l, H_l, W_l].
  virtual std::vector<torch::Tensor> features(const torch::Tensor& x) const = 0;
  virtual std::string id() const = 0;
};

/// Seeded random conv stack: 3->16 (3x3), 16->32 (3x3, stride 2), 32->64 (3x3, stride 2),
/// leaky ReLU after each. Weights are unit-variance normal scaled by 1/sqrt(fan_in) and
/// never trained.
class RandomConvBackbone final : public FeatureBackbone {
 public:
  explicit RandomConvBackbone(uint64_t seed = 1234);
  std::vector<torch::Tensor> features(const torch::Tensor& x) const override;
  std::string id() const override;

 private:
  uint64_t seed_;
  std::vector<torch::Tensor> weights_;
  std::vector<int64_t> strides_;
};

struct PerceptualWeights {
  double perceptual = 1.0;
  double mse = 1.0;
};

/// Per-term breakdown for one frame pair.
struct PerceptualTerms {
  std::vector<double> layers;  // unweighted per-layer distances
  double perceptual = 0.0;     // sum of layer distances
  double mse = 0.0;
  double total = 0.0;          // weights.perceptual * perceptual + weights.mse * mse
};

/// Multi-layer feature distance: features are unit-normalized along channels, then the
/// squared difference is summed over channels and averaged over positions; layers are
/// summed. Pixel mse is added as a separate term.
class PerceptualDistance {
 public:
  explicit PerceptualDistance(std::shared_ptr<const FeatureBackbone> backbone = nullptr,
                              PerceptualWeights weights = {});

  /// a, b [N, 3, H, W] -> differentiable weighted distance per frame [N].
  torch::Tensor per_frame(const torch::Tensor& a, const torch::Tensor& b) const;
  /// Pixel mse per frame [N].
  static torch::Tensor per_frame_mse(const torch::Tensor& a, const torch::Tensor& b);
  PerceptualTerms terms(const Frame& a, const Frame& b) const;
  double operator()(const Frame& a, const Frame& b) const { return terms(a, b).total; }

  const PerceptualWeights& weights() const { return weights_; }
  const FeatureBackbone& backbone() const { return *backbone_; }

 private:
  std::vector<torch::Tensor> layer_distances(const torch::Tensor& a, const torch::Tensor& b) const;

  std::shared_ptr<const FeatureBackbone> backbone_;
  PerceptualWeights weights_;
};

}  // namespace tempostyle
