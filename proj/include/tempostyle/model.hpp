#pragma once

#include <torch/torch.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempostyle/conditional_content.hpp"
#include "tempostyle/discriminators.hpp"
#include "tempostyle/json_util.hpp"
#include "tempostyle/synthesis.hpp"
#include "tempostyle/temporal_embedding.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

/// Architecture of the whole video GAN. Serialized into checkpoints so a model can be
/// rebuilt from the file alone.
struct ModelConfig {
  int resolution = 32;
  std::map<int, int> g_channels{{4, 64}, {8, 64}, {16, 32}, {32, 32}};
  std::vector<int> d_channels{16, 32, 64, 64, 64};
  int64_t k = 32;
  int64_t z_dim = 64;
  int64_t mapper_hidden = 128;
  double mapper_lr_mul = 0.01;
  int64_t c_dim = 128;
  int64_t embed_dim = 64;
  bool conditional = true;
  int n_actors = 4;
  int n_actions = 4;
  int max_clip_len = 96;
  bool use_dt = true;
  bool use_ds = true;
  int dt_frames = 3;
  int64_t dt_feat_dim = 32;
  int64_t dt_time_k = 16;

  GeneratorConfig generator() const;
  TimeDiscriminatorConfig time_discriminator() const;
  void validate() const;
};

Json to_json(const ModelConfig& c);
/// Unknown keys raise ConfigError naming the key.
ModelConfig model_config_from_json(const Json& j);

/// Generator side (t2v, mapper, fc, g) and discriminators (ds, dt) under one module
/// so parameter names match the checkpoint layout.
class VideoGANImpl : public torch::nn::Module {
 public:
  explicit VideoGANImpl(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  /// Content styles [B, c_dim]. Conditional: from label ids; unconditional: from z_c.
  torch::Tensor content(const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                        double lambda, const torch::Tensor& z_c = {});
  /// Renders frames for per-clip content w_c [B, c], motion m [B, k] and times [B, n]
  /// -> unclamped [B, n, 3, H, W].
  torch::Tensor render(const torch::Tensor& w_c, const torch::Tensor& m, const torch::Tensor& times);
  /// Per-frame styles [B, n, c_dim + k].
  torch::Tensor styles(const torch::Tensor& w_c, const torch::Tensor& m, const torch::Tensor& times);

  /// Whole clip from one z_m and one label, clamped frames. Renders in chunks.
  VideoClip generate_video(const MotionNoise& z_m, const ConditionLabel& label,
                           const std::vector<double>& timepoints, double lambda = 1.0);
  VideoClip render_clip(const torch::Tensor& w_c, const torch::Tensor& m,
                        const std::vector<double>& timepoints);

  std::vector<torch::Tensor> generator_parameters() const;
  std::vector<torch::Tensor> synthesis_parameters() const;
  std::vector<torch::Tensor> discriminator_parameters() const;

  Time2Vec t2v{nullptr};
  MotionMapper mapper{nullptr};
  ContentEncoder fc{nullptr};
  SynthesisNetwork g{nullptr};
  ShuffleDiscriminator ds{nullptr};
  TimeDiscriminator dt{nullptr};

 private:
  ModelConfig cfg_;
};
TORCH_MODULE(VideoGAN);

/// Standard-normal z_m drawn from a generator seeded with `seed`.
MotionNoise seeded_motion_noise(int64_t z_dim, uint64_t seed);

/// Deep copy of all parameters and buffers.
VideoGAN clone_model(const VideoGAN& src);

/// Hash of all generator-side parameter bytes; used to check that inversion never writes weights.
uint64_t parameter_hash(const std::vector<torch::Tensor>& params);

}  // namespace tempostyle
