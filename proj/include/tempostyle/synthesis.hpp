#pragma once

#include <torch/torch.h>

#include <map>
#include <vector>

#include "tempostyle/conditional_content.hpp"
#include "tempostyle/layers.hpp"
#include "tempostyle/temporal_embedding.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

/// Resolution ladder and widths of the synthesis network.
struct GeneratorConfig {
  int base_resolution = 4;
  int resolution = 32;
  std::map<int, int> channels{{4, 64}, {8, 64}, {16, 32}, {32, 32}};
  int64_t c_dim = 128;
  int64_t k = 32;

  int64_t style_dim() const { return c_dim + k; }
  std::vector<int> resolutions() const;
  void validate() const;
};

/// Content style plus temporal style, concatenated as [w_c, w_t] before injection.
struct StylePair {
  ContentStyle w_c;
  TemporalStyle w_t;
};

/// Style-modulated convolution. The per-input-channel scale multiplies the
/// weights; with demodulation every output filter is renormalized to unit norm.
/// Bias is added after the modulated convolution.
class ModulatedConv2dImpl : public torch::nn::Module {
 public:
  ModulatedConv2dImpl(int64_t in, int64_t out, int64_t kernel, bool demodulate);

  /// x [N, Cin, H, W], style [N, Cin] -> [N, Cout, H, W] (bias not included).
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& style);
  /// Per-sample effective weights [N, Cout, Cin, k, k].
  torch::Tensor transformed_weights(const torch::Tensor& style) const;
  torch::Tensor add_bias(const torch::Tensor& x) const;

  bool demodulate() const { return demodulate_; }
  int64_t in_channels() const { return weight.size(1); }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  bool demodulate_;
  double scale_;
};
TORCH_MODULE(ModulatedConv2d);

/// Functional form for a raw weight tensor; used by the layer and by tests.
torch::Tensor modulated_conv(const torch::Tensor& x, const torch::Tensor& weight,
                             const torch::Tensor& style, bool demodulate);

class SynthesisBlockImpl : public torch::nn::Module {
 public:
  SynthesisBlockImpl(int64_t in, int64_t out, int64_t style_dim, bool upsample);
  torch::Tensor forward(torch::Tensor x, const torch::Tensor& style);

  EqLinear affine0{nullptr}, affine1{nullptr};
  ModulatedConv2d conv0{nullptr}, conv1{nullptr};

 private:
  bool upsample_;
};
TORCH_MODULE(SynthesisBlock);

class ToRGBImpl : public torch::nn::Module {
 public:
  ToRGBImpl(int64_t in, int64_t style_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& style);

  EqLinear affine{nullptr};
  ModulatedConv2d conv{nullptr};
};
TORCH_MODULE(ToRGB);

/// G: constant 4x4 input, one block per resolution, skip-summed RGB outputs.
/// Every block receives the same concatenated [w_c, w_t] through its own affine maps.
class SynthesisNetworkImpl : public torch::nn::Module {
 public:
  explicit SynthesisNetworkImpl(const GeneratorConfig& cfg);

  /// styles [N, c_dim + k] -> unclamped images [N, 3, H, W].
  torch::Tensor forward(const torch::Tensor& styles);
  /// Deterministic single frame, clamped to [-1, 1].
  Frame generate_frame(const StylePair& style);

  const GeneratorConfig& config() const { return cfg_; }

  torch::Tensor const_input;
  std::vector<SynthesisBlock> blocks;
  std::vector<ToRGB> to_rgb;

 private:
  GeneratorConfig cfg_;
};
TORCH_MODULE(SynthesisNetwork);

torch::Tensor upsample2x(const torch::Tensor& x);

}  // namespace tempostyle
