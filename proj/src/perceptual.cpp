#include "tempostyle/perceptual.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "tempostyle/errors.hpp"
#include "tempostyle/layers.hpp"

namespace tempostyle {

RandomConvBackbone::RandomConvBackbone(uint64_t seed) : seed_(seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  const std::vector<std::pair<int64_t, int64_t>> shapes{{3, 16}, {16, 32}, {32, 64}};
  strides_ = {1, 2, 2};
  for (auto [in, out] : shapes) {
    auto w = torch::randn({out, in, 3, 3}, gen) / std::sqrt(static_cast<double>(in * 9));
    weights_.push_back(w);
  }
}

std::vector<torch::Tensor> RandomConvBackbone::features(const torch::Tensor& x) const {
  std::vector<torch::Tensor> out;
  auto h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = lrelu(torch::conv2d(h, weights_[i].to(h.dtype()), {}, strides_[i], 1));
    out.push_back(h);
  }
  return out;
}

std::string RandomConvBackbone::id() const { return "randconv-v1-seed" + std::to_string(seed_); }

PerceptualDistance::PerceptualDistance(std::shared_ptr<const FeatureBackbone> backbone,
                                       PerceptualWeights weights)
    : backbone_(backbone ? std::move(backbone) : std::make_shared<RandomConvBackbone>()),
      weights_(weights) {
  if (weights_.perceptual < 0 || weights_.mse < 0) throw ConfigError("perceptual weights must be >= 0");
}

namespace {

torch::Tensor unit_channels(const torch::Tensor& f) {
  return f / torch::sqrt(f.square().sum(1, true) + 1e-10);
}

void check_pair(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw ShapeError("perceptual distance: frame shapes differ");
  if (a.dim() != 4 || a.size(1) != 3) throw ShapeError("perceptual distance: expected [N, 3, H, W]");
}

}  // namespace

std::vector<torch::Tensor> PerceptualDistance::layer_distances(const torch::Tensor& a,
                                                               const torch::Tensor& b) const {
  const int64_t n = a.size(0);
  auto feats = backbone_->features(torch::cat({a, b}, 0));
  std::vector<torch::Tensor> out;
  for (const auto& f : feats) {
    auto fa = unit_channels(f.narrow(0, 0, n));
    auto fb = unit_channels(f.narrow(0, n, n));
    out.push_back((fa - fb).square().sum(1).mean({1, 2}));
  }
  return out;
}

torch::Tensor PerceptualDistance::per_frame_mse(const torch::Tensor& a, const torch::Tensor& b) {
  check_pair(a, b);
  return (a - b).square().mean({1, 2, 3});
}

torch::Tensor PerceptualDistance::per_frame(const torch::Tensor& a, const torch::Tensor& b) const {
  check_pair(a, b);
  torch::Tensor total = weights_.mse * per_frame_mse(a, b);
  if (weights_.perceptual > 0) {
    for (const auto& d : layer_distances(a, b)) total = total + weights_.perceptual * d;
  }
  return total;
}

PerceptualTerms PerceptualDistance::terms(const Frame& fa, const Frame& fb) const {
  torch::NoGradGuard guard;
  auto a = fa.pixels.unsqueeze(0);
  auto b = fb.pixels.unsqueeze(0);
  check_pair(a, b);
  PerceptualTerms t;
  for (const auto& d : layer_distances(a, b)) {
    t.layers.push_back(d.item<double>());
    t.perceptual += t.layers.back();
  }
  t.mse = per_frame_mse(a, b).item<double>();
  t.total = weights_.perceptual * t.perceptual + weights_.mse * t.mse;
  return t;
}

}  // namespace tempostyle
