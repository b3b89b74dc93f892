#pragma once

#include <torch/torch.h>

namespace tempostyle {

/// sqrt(2)-gained leaky rectifier with slope 0.2, the activation used by every
/// hidden layer in the generator and discriminators.
torch::Tensor lrelu(const torch::Tensor& x);

inline constexpr double kLreluGain = 1.4142135623730951;

/// Linear layer with runtime weight scaling (equalized learning rate).
/// The stored weight is N(0, 1/lr_mul^2); the effective weight is
/// weight * lr_mul / sqrt(in).
class EqLinearImpl : public torch::nn::Module {
 public:
  EqLinearImpl(int64_t in, int64_t out, bool bias = true, double bias_init = 0.0,
               double lr_mul = 1.0);

  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor effective_weight() const;
  torch::Tensor effective_bias() const;

  int64_t in_features() const { return in_; }
  int64_t out_features() const { return out_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  int64_t in_, out_;
  double scale_, lr_mul_;
};
TORCH_MODULE(EqLinear);

/// 2-D convolution with equalized learning rate.
class EqConv2dImpl : public torch::nn::Module {
 public:
  EqConv2dImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride = 1, bool bias = true);

  torch::Tensor forward(const torch::Tensor& x);

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  int64_t stride_, padding_;
  double scale_;
};
TORCH_MODULE(EqConv2d);

}  // namespace tempostyle
