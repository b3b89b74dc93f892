#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <random>
#include <vector>

#include "tempostyle/layers.hpp"
#include "tempostyle/temporal_embedding.hpp"

namespace tempostyle {

/// 2-D convolutional trunk: 1x1 from-RGB then stride-2 3x3 stages down to 2x2.
/// channels = {from_rgb, stage0, stage1, ...}; stage count = log2(resolution) - 1.
class ConvTrunkImpl : public torch::nn::Module {
 public:
  ConvTrunkImpl(int resolution, const std::vector<int>& channels);

  /// [N, 3, H, W] -> flattened [N, flat_dim()].
  torch::Tensor forward(const torch::Tensor& x);
  int64_t flat_dim() const { return flat_dim_; }

  EqConv2d from_rgb{nullptr};
  std::vector<EqConv2d> stages;

 private:
  int resolution_;
  int64_t flat_dim_;
};
TORCH_MODULE(ConvTrunk);

int trunk_stage_count(int resolution);

/// Uniformly random permutation of 0..n-1 without fixed points. Throws ConfigError for n < 2.
std::vector<int64_t> random_derangement(int64_t n, std::mt19937_64& rng);

struct ShuffledPairs {
  torch::Tensor first;   // [B, 3, H, W], frame 1 of video i
  torch::Tensor second;  // [B, 3, H, W], frame 2 of video sigma(i)
  std::vector<int64_t> sigma;
};

/// Mismatches the second frame of each per-video pair across the batch by a derangement.
ShuffledPairs shuffle_pairs(const torch::Tensor& first, const torch::Tensor& second,
                            std::mt19937_64& rng);

/// D_s: shared trunk on both frames, flattened features concatenated in order,
/// one affine layer to a logit. Sees no labels and no time.
class ShuffleDiscriminatorImpl : public torch::nn::Module {
 public:
  ShuffleDiscriminatorImpl(int resolution, const std::vector<int>& channels);

  torch::Tensor forward(const torch::Tensor& first, const torch::Tensor& second);

  ConvTrunk trunk{nullptr};
  EqLinear fc{nullptr};
};
TORCH_MODULE(ShuffleDiscriminator);

struct TimeDiscriminatorConfig {
  int resolution = 32;
  std::vector<int> channels{16, 32, 64, 64, 64};
  int n_frames = 3;
  int64_t feat_dim = 32;   // d_t output per frame
  int64_t time_k = 16;     // D_t's own time2vec
  int64_t embed_dim = 64;  // actor/action table width
  bool conditional = true;
  int n_actors = 4;
  int n_actions = 4;
  int max_clip_len = 96;
  double w_time = 1.0;
  double w_actor = 1.0;
  double w_action = 1.0;
};

/// The three dot-product terms of a D_t score, each [B].
struct TimeScoreTerms {
  torch::Tensor time;
  torch::Tensor actor;
  torch::Tensor action;  // already multiplied by lambda
  torch::Tensor total() const;
};

/// D_t: per-frame trunk + d_t features concatenated in temporal order into f;
/// score = w_time <f, P e_time> + w_actor <f, A e_actor> + lambda w_action <f, B e_action>.
class TimeDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit TimeDiscriminatorImpl(const TimeDiscriminatorConfig& cfg);

  /// frames [B, n, 3, H, W], times [B, n], ids int64 [B].
  torch::Tensor forward(const torch::Tensor& frames, const torch::Tensor& times,
                        const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                        double lambda);
  TimeScoreTerms score_terms(const torch::Tensor& frames, const torch::Tensor& times,
                             const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                             double lambda);
  /// Terms with caller-supplied embedding rows (before projection), [B, embed_dim].
  TimeScoreTerms score_terms_embedded(const torch::Tensor& frames, const torch::Tensor& times,
                                      const torch::Tensor& actor_embed,
                                      const torch::Tensor& action_embed, double lambda);
  /// Single-frame variant; requires a D_t built with n_frames == 1.
  torch::Tensor score_single(const torch::Tensor& frame, const torch::Tensor& time,
                             const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                             double lambda);
  /// Penultimate per-frame features d_t(trunk(x)): [M, 3, H, W] -> [M, feat_dim].
  torch::Tensor frame_features(const torch::Tensor& frames);

  const TimeDiscriminatorConfig& config() const { return cfg_; }

  ConvTrunk trunk{nullptr};
  EqLinear d_t{nullptr};
  Time2Vec t2v{nullptr};
  EqLinear time_proj{nullptr};
  torch::Tensor actor_table, action_table;
  EqLinear actor_proj{nullptr}, action_proj{nullptr};

 private:
  torch::Tensor video_features(const torch::Tensor& frames);
  TimeDiscriminatorConfig cfg_;
};
TORCH_MODULE(TimeDiscriminator);

}  // namespace tempostyle
