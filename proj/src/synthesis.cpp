#include "tempostyle/synthesis.hpp"

#include <cmath>
#include <string>

#include "tempostyle/errors.hpp"

namespace tempostyle {

namespace F = torch::nn::functional;

std::vector<int> GeneratorConfig::resolutions() const {
  std::vector<int> out;
  for (int r = base_resolution; r <= resolution; r *= 2) out.push_back(r);
  return out;
}

void GeneratorConfig::validate() const {
  if (base_resolution < 4 || (base_resolution & (base_resolution - 1)) != 0) {
    throw ConfigError("generator: base_resolution must be a power of two >= 4");
  }
  if (resolution < base_resolution || (resolution & (resolution - 1)) != 0) {
    throw ConfigError("generator: resolution must be base_resolution * 2^n");
  }
  for (int r : resolutions()) {
    auto it = channels.find(r);
    if (it == channels.end() || it->second < 1) {
      throw ConfigError("generator: missing channel count for resolution " + std::to_string(r));
    }
  }
  if (c_dim < 1 || k < 2) throw ConfigError("generator: c_dim >= 1 and k >= 2 required");
}

torch::Tensor upsample2x(const torch::Tensor& x) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

torch::Tensor modulated_conv(const torch::Tensor& x, const torch::Tensor& weight,
                             const torch::Tensor& style, bool demodulate) {
  if (x.dim() != 4 || style.dim() != 2 || weight.dim() != 4) {
    throw ShapeError("modulated_conv: expected x [N,C,H,W], style [N,C], weight [O,C,k,k]");
  }
  if (style.size(1) != x.size(1) || weight.size(1) != x.size(1) || style.size(0) != x.size(0)) {
    throw ShapeError("modulated_conv: style length must equal the input channel count");
  }
  // Scaling the input per channel equals scaling the weights per input channel;
  // demodulation is a per-sample, per-output-channel factor.
  auto out = torch::conv2d(x * style.unsqueeze(-1).unsqueeze(-1), weight, {}, 1, weight.size(-1) / 2);
  if (demodulate) {
    auto wsq = weight.square().sum({2, 3});                          // [O, C]
    auto denom = torch::rsqrt(torch::matmul(style.square(), wsq.t()) + 1e-8);  // [N, O]
    out = out * denom.unsqueeze(-1).unsqueeze(-1);
  }
  return out;
}

ModulatedConv2dImpl::ModulatedConv2dImpl(int64_t in, int64_t out, int64_t kernel, bool demodulate)
    : demodulate_(demodulate), scale_(1.0 / std::sqrt(static_cast<double>(in * kernel * kernel))) {
  weight = register_parameter("weight", torch::randn({out, in, kernel, kernel}));
  bias = register_parameter("bias", torch::zeros({out}));
}

torch::Tensor ModulatedConv2dImpl::forward(const torch::Tensor& x, const torch::Tensor& style) {
  return modulated_conv(x, weight * scale_, style, demodulate_);
}

torch::Tensor ModulatedConv2dImpl::transformed_weights(const torch::Tensor& style) const {
  auto w = (weight * scale_).unsqueeze(0) * style.unsqueeze(1).unsqueeze(-1).unsqueeze(-1);
  if (demodulate_) w = w * torch::rsqrt(w.square().sum({2, 3, 4}, true) + 1e-8);
  return w;
}

torch::Tensor ModulatedConv2dImpl::add_bias(const torch::Tensor& x) const {
  return x + bias.view({1, -1, 1, 1});
}

SynthesisBlockImpl::SynthesisBlockImpl(int64_t in, int64_t out, int64_t style_dim, bool upsample)
    : upsample_(upsample) {
  affine0 = register_module("affine0", EqLinear(style_dim, in, true, 1.0));
  conv0 = register_module("conv0", ModulatedConv2d(in, out, 3, true));
  affine1 = register_module("affine1", EqLinear(style_dim, out, true, 1.0));
  conv1 = register_module("conv1", ModulatedConv2d(out, out, 3, true));
}

torch::Tensor SynthesisBlockImpl::forward(torch::Tensor x, const torch::Tensor& style) {
  if (upsample_) x = upsample2x(x);
  x = lrelu(conv0->add_bias(conv0->forward(x, affine0->forward(style))));
  x = lrelu(conv1->add_bias(conv1->forward(x, affine1->forward(style))));
  return x;
}

ToRGBImpl::ToRGBImpl(int64_t in, int64_t style_dim) {
  affine = register_module("affine", EqLinear(style_dim, in, true, 1.0));
  conv = register_module("conv", ModulatedConv2d(in, 3, 1, false));
}

torch::Tensor ToRGBImpl::forward(const torch::Tensor& x, const torch::Tensor& style) {
  return conv->add_bias(conv->forward(x, affine->forward(style)));
}

SynthesisNetworkImpl::SynthesisNetworkImpl(const GeneratorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto res = cfg_.resolutions();
  const int64_t c0 = cfg_.channels.at(res.front());
  const_input = register_parameter("const_input", torch::randn({1, c0, res.front(), res.front()}));
  int64_t prev = c0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const int r = res[i];
    const int64_t ch = cfg_.channels.at(r);
    blocks.push_back(register_module("block" + std::to_string(r),
                                     SynthesisBlock(prev, ch, cfg_.style_dim(), i > 0)));
    to_rgb.push_back(register_module("to_rgb" + std::to_string(r), ToRGB(ch, cfg_.style_dim())));
    prev = ch;
  }
}

torch::Tensor SynthesisNetworkImpl::forward(const torch::Tensor& styles) {
  if (styles.dim() != 2 || styles.size(1) != cfg_.style_dim()) {
    throw ShapeError("synthesis: styles must be [N, " + std::to_string(cfg_.style_dim()) + "]");
  }
  auto x = const_input.expand({styles.size(0), -1, -1, -1});
  torch::Tensor img;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    x = blocks[i]->forward(x, styles);
    auto rgb = to_rgb[i]->forward(x, styles);
    img = img.defined() ? upsample2x(img) + rgb : rgb;
  }
  return img;
}

Frame SynthesisNetworkImpl::generate_frame(const StylePair& style) {
  if (static_cast<int64_t>(style.w_c.w.size()) != cfg_.c_dim ||
      static_cast<int64_t>(style.w_t.w.size()) != cfg_.k) {
    throw ConfigError("generate_frame: style dimensions do not match the generator config");
  }
  torch::NoGradGuard guard;
  std::vector<double> joined(style.w_c.w);
  joined.insert(joined.end(), style.w_t.w.begin(), style.w_t.w.end());
  auto s = torch::tensor(joined, torch::kFloat64).to(const_input.scalar_type()).unsqueeze(0);
  auto img = forward(s).squeeze(0).clamp(-1.0, 1.0);
  return Frame{img, style.w_t.t};
}

}  // namespace tempostyle
