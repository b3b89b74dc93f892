#include "tempostyle/conditional_content.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tempostyle/errors.hpp"

namespace tempostyle {

void RampSchedule::validate() const {
  if (start_iter < 0 || start_iter >= end_iter) {
    throw ConfigError("ramp: require 0 <= start_iter < end_iter, got " +
                      std::to_string(start_iter) + ", " + std::to_string(end_iter));
  }
}

double ramp(const RampSchedule& schedule, int64_t iter) {
  const double x = static_cast<double>(iter - schedule.start_iter) /
                   static_cast<double>(schedule.end_iter - schedule.start_iter);
  return std::clamp(x, 0.0, 1.0);
}

ContentEncoderImpl::ContentEncoderImpl(int n_actors, int n_actions, int64_t embed_dim,
                                       int64_t c_dim, bool conditional)
    : n_actors_(n_actors), n_actions_(n_actions), embed_dim_(embed_dim), c_dim_(c_dim),
      conditional_(conditional) {
  if (conditional) {
    if (n_actors < 1 || n_actions < 1) throw ConfigError("content encoder: empty label vocabulary");
    actor_table = register_parameter("actor_table", torch::randn({n_actors, embed_dim}));
    action_table = register_parameter("action_table", torch::randn({n_actions, embed_dim}));
  }
  layer0 = register_module("layer0", EqLinear(2 * embed_dim, c_dim));
  layer1 = register_module("layer1", EqLinear(c_dim, c_dim));
}

void ContentEncoderImpl::check_label(const ConditionLabel& label) const {
  if (label.actor_id < 0 || label.actor_id >= n_actors_) {
    throw LookupError("unknown actor id " + std::to_string(label.actor_id));
  }
  if (label.action_id < 0 || label.action_id >= n_actions_) {
    throw LookupError("unknown action id " + std::to_string(label.action_id));
  }
}

void ContentEncoderImpl::check_ids(const torch::Tensor& actor_ids,
                                   const torch::Tensor& action_ids) const {
  if (actor_ids.numel() > 0 &&
      (actor_ids.min().item<int64_t>() < 0 || actor_ids.max().item<int64_t>() >= n_actors_)) {
    throw LookupError("actor id out of range");
  }
  if (action_ids.numel() > 0 &&
      (action_ids.min().item<int64_t>() < 0 || action_ids.max().item<int64_t>() >= n_actions_)) {
    throw LookupError("action id out of range");
  }
}

torch::Tensor ContentEncoderImpl::from_embeddings(const torch::Tensor& actor_embed,
                                                  const torch::Tensor& action_embed,
                                                  double lambda) {
  auto x = torch::cat({actor_embed, action_embed * lambda}, -1);
  return layer1->forward(lrelu(layer0->forward(x)));
}

torch::Tensor ContentEncoderImpl::forward(const torch::Tensor& actor_ids,
                                          const torch::Tensor& action_ids, double lambda) {
  if (!conditional_) throw ConfigError("content encoder: labels given to an unconditional model");
  check_ids(actor_ids, action_ids);
  return from_embeddings(actor_table.index_select(0, actor_ids),
                         action_table.index_select(0, action_ids), lambda);
}

torch::Tensor ContentEncoderImpl::from_noise(const torch::Tensor& z_c) {
  if (z_c.size(-1) != 2 * embed_dim_) {
    throw ConfigError("content encoder: z_c must have dimension " + std::to_string(2 * embed_dim_));
  }
  return layer1->forward(lrelu(layer0->forward(z_c)));
}

ContentStyle ContentEncoderImpl::content_style(const ConditionLabel& label, double lambda) {
  check_label(label);
  torch::NoGradGuard guard;
  auto ids = [](int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); };
  auto w = forward(ids(label.actor_id), ids(label.action_id), lambda)
               .squeeze(0)
               .to(torch::kFloat64)
               .contiguous();
  return ContentStyle{std::vector<double>(w.data_ptr<double>(), w.data_ptr<double>() + w.numel())};
}

namespace {
torch::Tensor blend_rows(const torch::Tensor& table, int rows, int a1, int a2, double alpha,
                         const char* what) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError(std::string("interpolate_") + what + ": alpha must lie in [0, 1]");
  }
  if (a1 < 0 || a1 >= rows || a2 < 0 || a2 >= rows) {
    throw LookupError(std::string("interpolate_") + what + ": id out of range");
  }
  // Endpoints return the table rows themselves so they match bitwise.
  if (alpha == 0.0) return table[a1];
  if (alpha == 1.0) return table[a2];
  return table[a1] * (1.0 - alpha) + table[a2] * alpha;
}
}  // namespace

torch::Tensor ContentEncoderImpl::interpolate_action(int a1, int a2, double alpha) const {
  if (!conditional_) throw ConfigError("interpolate_action: unconditional model");
  return blend_rows(action_table, n_actions_, a1, a2, alpha, "action");
}

torch::Tensor ContentEncoderImpl::interpolate_actor(int a1, int a2, double alpha) const {
  if (!conditional_) throw ConfigError("interpolate_actor: unconditional model");
  return blend_rows(actor_table, n_actors_, a1, a2, alpha, "actor");
}

}  // namespace tempostyle
