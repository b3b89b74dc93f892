#include "tempostyle/layers.hpp"

#include <cmath>

namespace tempostyle {

torch::Tensor lrelu(const torch::Tensor& x) {
  return torch::leaky_relu(x, 0.2) * kLreluGain;
}

EqLinearImpl::EqLinearImpl(int64_t in, int64_t out, bool bias, double bias_init, double lr_mul)
    : in_(in), out_(out), scale_(lr_mul / std::sqrt(static_cast<double>(in))), lr_mul_(lr_mul) {
  weight = register_parameter("weight", torch::randn({out, in}) / lr_mul);
  if (bias) {
    this->bias = register_parameter("bias", torch::full({out}, bias_init / lr_mul));
  }
}

torch::Tensor EqLinearImpl::effective_weight() const { return weight * scale_; }

torch::Tensor EqLinearImpl::effective_bias() const {
  return bias.defined() ? bias * lr_mul_ : torch::Tensor();
}

torch::Tensor EqLinearImpl::forward(const torch::Tensor& x) {
  return torch::nn::functional::linear(x, effective_weight(), effective_bias());
}

EqConv2dImpl::EqConv2dImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride, bool bias)
    : stride_(stride), padding_(kernel / 2),
      scale_(1.0 / std::sqrt(static_cast<double>(in * kernel * kernel))) {
  weight = register_parameter("weight", torch::randn({out, in, kernel, kernel}));
  if (bias) this->bias = register_parameter("bias", torch::zeros({out}));
}

torch::Tensor EqConv2dImpl::forward(const torch::Tensor& x) {
  return torch::conv2d(x, weight * scale_, bias, stride_, padding_);
}

}  // namespace tempostyle
