#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

#include "tempostyle/layers.hpp"

namespace tempostyle {

struct ConditionLabel {
  int actor_id = 0;
  int action_id = 0;

  friend bool operator==(const ConditionLabel&, const ConditionLabel&) = default;
};

struct ContentStyle {
  std::vector<double> w;
};

/// Linear 0 -> 1 schedule of the action-embedding scale.
struct RampSchedule {
  int64_t start_iter = 4000;
  int64_t end_iter = 6000;

  void validate() const;
};

/// clamp((iter - start) / (end - start), 0, 1).
double ramp(const RampSchedule& schedule, int64_t iter);

/// F_c. Conditional mode: actor and action tables (64-d each), the action row
/// scaled by lambda, concatenated and mixed by a 2-layer perceptron into w_c.
/// Unconditional mode: a noise vector z_c replaces the concatenated embeddings.
class ContentEncoderImpl : public torch::nn::Module {
 public:
  ContentEncoderImpl(int n_actors, int n_actions, int64_t embed_dim, int64_t c_dim,
                     bool conditional);

  /// actor_ids, action_ids: int64 [B]. Returns [B, c_dim].
  torch::Tensor forward(const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                        double lambda);
  /// Mixes already looked-up embeddings; lets callers blend rows of either table.
  torch::Tensor from_embeddings(const torch::Tensor& actor_embed, const torch::Tensor& action_embed,
                                double lambda);
  /// Unconditional mode input, z_c: [B, 2 * embed_dim].
  torch::Tensor from_noise(const torch::Tensor& z_c);

  ContentStyle content_style(const ConditionLabel& label, double lambda);

  /// (1 - alpha) * e(a1) + alpha * e(a2). Throws DomainError for alpha outside [0, 1].
  torch::Tensor interpolate_action(int a1, int a2, double alpha) const;
  torch::Tensor interpolate_actor(int a1, int a2, double alpha) const;

  void check_label(const ConditionLabel& label) const;
  void check_ids(const torch::Tensor& actor_ids, const torch::Tensor& action_ids) const;

  bool conditional() const { return conditional_; }
  int n_actors() const { return n_actors_; }
  int n_actions() const { return n_actions_; }
  int64_t embed_dim() const { return embed_dim_; }
  int64_t c_dim() const { return c_dim_; }

  torch::Tensor actor_table;
  torch::Tensor action_table;
  EqLinear layer0{nullptr};
  EqLinear layer1{nullptr};

 private:
  int n_actors_, n_actions_;
  int64_t embed_dim_, c_dim_;
  bool conditional_;
};
TORCH_MODULE(ContentEncoder);

}  // namespace tempostyle
