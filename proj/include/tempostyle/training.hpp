#pragma once

#include <torch/torch.h>

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tempostyle/checkpoint.hpp"
#include "tempostyle/conditional_content.hpp"
#include "tempostyle/errors.hpp"
#include "tempostyle/model.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

struct TrainConfig {
  int schema_version = 1;
  std::string dataset;  // corpus root; the "train" split is used
  uint64_t seed = 0;
  int batch_size = 16;
  int64_t total_iters = 20000;
  double g_lr = 2.5e-3;
  double d_lr = 2.5e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  double r1_gamma = 0.0128;
  int r1_interval = 16;
  double t2v_lr_mul = 0.01;  // learning-rate multiplier of the generator's time2vec
  RampSchedule ramp;
  bool use_ramp = true;  // false: lambda = 1 from the first iteration
  int64_t log_every = 10;
  int64_t checkpoint_every = 1000;
  int threads = 1;
  ModelConfig model;

  void validate() const;
  /// lambda for iteration iter (ramp() or 1 when the ramp is disabled).
  double lambda_at(int64_t iter) const;
};

Json to_json(const TrainConfig& c);
/// Unknown keys raise ConfigError naming the key; missing keys keep their defaults.
TrainConfig train_config_from_json(const Json& j);

/// Applies an ablation variant: full, dt1, no-dt, no-ds, no-ramp, unconditional, k<N>.
/// Throws ConfigError for anything else.
void apply_variant(TrainConfig& cfg, const std::string& variant);

/// Mean softplus(-logit): generator side of the non-saturating logistic loss.
torch::Tensor nonsaturating_g_loss(const torch::Tensor& fake_logits);
/// Mean softplus(fake) + mean softplus(-real).
torch::Tensor logistic_d_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);
/// (gamma / 2) * mean over the batch of ||d logits_i / d inputs_i||^2. inputs must require
/// grad and be part of the graph that produced logits; builds a differentiable graph.
torch::Tensor r1_penalty(const torch::Tensor& real_logits, const std::vector<torch::Tensor>& inputs,
                         double gamma);

/// Adam whose state is addressable by parameter name (for checkpoints).
class Adam {
 public:
  struct Options {
    double lr = 2.5e-3;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double eps = 1e-8;
  };

  Adam(std::vector<std::pair<std::string, torch::Tensor>> params, Options opt);

  /// Multiplies the learning rate of every parameter whose name starts with prefix.
  void scale_lr(const std::string& prefix, double mul);
  void zero_grad();
  /// Parameters without a gradient are left untouched.
  void step();
  int64_t steps() const { return steps_; }
  const Options& options() const { return opt_; }

  void save_state(Checkpoint& ckpt, const std::string& prefix) const;
  void load_state(const Checkpoint& ckpt, const std::string& prefix, int64_t steps);

 private:
  Options opt_;
  std::vector<std::pair<std::string, torch::Tensor>> params_;
  std::vector<torch::Tensor> m_, v_;
  std::vector<double> lr_scale_;
  int64_t steps_ = 0;
};

/// Consecutive real frames with their time-points.
struct FrameTriplet {
  torch::Tensor frames;  // [3, 3, H, W]
  torch::Tensor times;   // [3]
  int64_t start = 0;
};

/// Start s uniform in [0, length - 3]; frames s, s+1, s+2. Throws DomainError for short clips.
FrameTriplet sample_real_triplet(const VideoClip& clip, std::mt19937_64& rng);

struct IterationStats {
  int64_t iter = 0;  // zero-based index of the finished iteration
  double g_loss = 0.0;
  double d_loss = 0.0;
  double lambda = 0.0;
  std::optional<double> r1;  // set on iterations that ran the lazy R1 step
};
Json to_json(const IterationStats& s);

/// Raised for a non-finite loss; carries the diagnostic state of the failing iteration.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, Json dump)
      : NumericalError(what), dump_(std::move(dump)) {}
  const Json& dump() const { return dump_; }

 private:
  Json dump_;
};

/// Alternating D/G updates over an in-memory training split.
class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<VideoClip> clips, LabelVocabulary vocab);
  /// Continues from a checkpoint written by checkpoint(); the config comes from the file.
  static Trainer resume(const Checkpoint& ckpt, std::vector<VideoClip> clips);

  IterationStats step();
  int64_t iteration() const { return iter_; }
  const TrainConfig& config() const { return cfg_; }
  VideoGAN model() const { return model_; }

  /// Model, optimizer state, RNG state, configs and vocabulary.
  Checkpoint checkpoint() const;

  /// Parameters that have not yet received a nonzero gradient.
  std::vector<std::string> parameters_without_gradient() const;

 private:
  struct Batch {
    torch::Tensor frames;  // [B, 3, 3, H, W]
    torch::Tensor times;   // [B, 3]
    torch::Tensor actor_ids, action_ids;
    std::vector<int64_t> clip_ids;
  };
  Batch real_batch();
  torch::Tensor content_for(const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                            double lambda);
  torch::Tensor dt_logits(const torch::Tensor& frames, const torch::Tensor& times,
                          const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                          double lambda);
  void set_discriminator_grad(bool on);
  void note_gradients();

  TrainConfig cfg_;
  std::vector<VideoClip> clips_;
  LabelVocabulary vocab_;
  VideoGAN model_{nullptr};
  std::unique_ptr<Adam> g_opt_, d_opt_;
  std::mt19937_64 rng_;
  at::Generator gen_;  // noise draws; independent of the global torch RNG
  int64_t iter_ = 0;
  std::map<std::string, bool> grad_seen_;
};

/// Files written under out_dir: metrics.ndjson, ckpt_<iter>.ckpt every checkpoint_every
/// iterations, final.ckpt, and abort_dump.json + abort.ckpt on divergence.
struct TrainRunOptions {
  std::string out_dir;
  std::optional<std::string> resume;
  std::function<void(const IterationStats&)> on_log;
};
Checkpoint run_training(const TrainConfig& cfg, const TrainRunOptions& opts);

/// lambda a trained checkpoint was left at (1 when the manifest has no training config).
double checkpoint_lambda(const Checkpoint& ckpt);

}  // namespace tempostyle
