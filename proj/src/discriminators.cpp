#include "tempostyle/discriminators.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tempostyle/errors.hpp"

namespace tempostyle {

int trunk_stage_count(int resolution) {
  int stages = 0;
  for (int r = resolution; r > 2; r /= 2) ++stages;
  return stages;
}

ConvTrunkImpl::ConvTrunkImpl(int resolution, const std::vector<int>& channels)
    : resolution_(resolution) {
  const int stages = trunk_stage_count(resolution);
  if (static_cast<int>(channels.size()) != stages + 1) {
    throw ConfigError("discriminator trunk: resolution " + std::to_string(resolution) + " needs " +
                      std::to_string(stages + 1) + " channel entries, got " +
                      std::to_string(channels.size()));
  }
  from_rgb = register_module("from_rgb", EqConv2d(3, channels[0], 1));
  for (int i = 0; i < stages; ++i) {
    this->stages.push_back(register_module("stage" + std::to_string(i),
                                           EqConv2d(channels[i], channels[i + 1], 3, 2)));
  }
  flat_dim_ = static_cast<int64_t>(channels.back()) * 4;
}

torch::Tensor ConvTrunkImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != resolution_ || x.size(3) != resolution_) {
    throw ShapeError("discriminator trunk: expected [N, 3, " + std::to_string(resolution_) + ", " +
                     std::to_string(resolution_) + "]");
  }
  auto h = lrelu(from_rgb->forward(x));
  for (auto& s : stages) h = lrelu(s->forward(h));
  return h.flatten(1);
}

std::vector<int64_t> random_derangement(int64_t n, std::mt19937_64& rng) {
  if (n < 2) throw ConfigError("shuffle_pairs: a derangement needs at least 2 videos");
  std::vector<int64_t> sigma(static_cast<std::size_t>(n));
  for (;;) {
    std::iota(sigma.begin(), sigma.end(), int64_t{0});
    // Fisher-Yates with an explicit uniform draw so the sequence is identical across
    // standard library implementations.
    for (int64_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<int64_t>(rng() % static_cast<uint64_t>(i + 1));
      std::swap(sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(j)]);
    }
    bool fixed = false;
    for (int64_t i = 0; i < n && !fixed; ++i) fixed = sigma[static_cast<std::size_t>(i)] == i;
    if (!fixed) return sigma;
  }
}

ShuffledPairs shuffle_pairs(const torch::Tensor& first, const torch::Tensor& second,
                            std::mt19937_64& rng) {
  if (first.sizes() != second.sizes()) throw ShapeError("shuffle_pairs: frame shapes differ");
  auto sigma = random_derangement(first.size(0), rng);
  auto idx = torch::tensor(sigma, torch::kInt64);
  return ShuffledPairs{first, second.index_select(0, idx), std::move(sigma)};
}

ShuffleDiscriminatorImpl::ShuffleDiscriminatorImpl(int resolution, const std::vector<int>& channels) {
  trunk = register_module("trunk", ConvTrunk(resolution, channels));
  fc = register_module("fc", EqLinear(2 * trunk->flat_dim(), 1));
}

torch::Tensor ShuffleDiscriminatorImpl::forward(const torch::Tensor& first,
                                                const torch::Tensor& second) {
  if (first.sizes() != second.sizes()) throw ShapeError("ds_score: frame shapes differ");
  const int64_t n = first.size(0);
  auto feats = trunk->forward(torch::cat({first, second}, 0));
  auto joined = torch::cat({feats.narrow(0, 0, n), feats.narrow(0, n, n)}, 1);
  return fc->forward(joined).squeeze(1);
}

torch::Tensor TimeScoreTerms::total() const { return time + actor + action; }

TimeDiscriminatorImpl::TimeDiscriminatorImpl(const TimeDiscriminatorConfig& cfg) : cfg_(cfg) {
  if (cfg_.n_frames < 1) throw ConfigError("D_t: n_frames must be positive");
  const int64_t f_dim = cfg_.n_frames * cfg_.feat_dim;
  trunk = register_module("trunk", ConvTrunk(cfg_.resolution, cfg_.channels));
  d_t = register_module("d_t", EqLinear(trunk->flat_dim(), cfg_.feat_dim));
  t2v = register_module("t2v", Time2Vec(init_time2vec(static_cast<int>(cfg_.time_k), cfg_.max_clip_len)));
  time_proj = register_module("time_proj", EqLinear(cfg_.n_frames * cfg_.time_k, f_dim));
  if (cfg_.conditional) {
    actor_table = register_parameter("actor_table", torch::randn({cfg_.n_actors, cfg_.embed_dim}));
    actor_proj = register_module("actor_proj", EqLinear(cfg_.embed_dim, f_dim, false));
    action_table =
        register_parameter("action_table", torch::randn({cfg_.n_actions, cfg_.embed_dim}));
    action_proj = register_module("action_proj", EqLinear(cfg_.embed_dim, f_dim, false));
  }
}

torch::Tensor TimeDiscriminatorImpl::frame_features(const torch::Tensor& frames) {
  return d_t->forward(trunk->forward(frames));
}

torch::Tensor TimeDiscriminatorImpl::video_features(const torch::Tensor& frames) {
  if (frames.dim() != 5 || frames.size(1) != cfg_.n_frames) {
    throw ShapeError("D_t: expected frames [B, " + std::to_string(cfg_.n_frames) + ", 3, H, W]");
  }
  const int64_t b = frames.size(0);
  auto flat = frames.reshape({b * cfg_.n_frames, frames.size(2), frames.size(3), frames.size(4)});
  return frame_features(flat).reshape({b, cfg_.n_frames * cfg_.feat_dim});
}

TimeScoreTerms TimeDiscriminatorImpl::score_terms_embedded(const torch::Tensor& frames,
                                                           const torch::Tensor& times,
                                                           const torch::Tensor& actor_embed,
                                                           const torch::Tensor& action_embed,
                                                           double lambda) {
  if (times.dim() != 2 || times.size(0) != frames.size(0) || times.size(1) != cfg_.n_frames) {
    throw ShapeError("D_t: times must be [B, n_frames]");
  }
  if (!torch::isfinite(times).all().item<bool>()) throw DomainError("D_t: non-finite time-point");
  auto f = video_features(frames);
  auto e_time = t2v->forward(times).reshape({frames.size(0), cfg_.n_frames * cfg_.time_k});
  // Dot products are scaled by 1/sqrt(dim), like the equalized layers, to keep logits O(1).
  const double dot_scale = 1.0 / std::sqrt(static_cast<double>(f.size(1)));
  TimeScoreTerms terms;
  terms.time = (f * time_proj->forward(e_time)).sum(1) * (cfg_.w_time * dot_scale);
  if (cfg_.conditional) {
    terms.actor = (f * actor_proj->forward(actor_embed)).sum(1) * (cfg_.w_actor * dot_scale);
    terms.action =
        (f * action_proj->forward(action_embed)).sum(1) * (cfg_.w_action * lambda * dot_scale);
  } else {
    terms.actor = torch::zeros_like(terms.time);
    terms.action = torch::zeros_like(terms.time);
  }
  return terms;
}

TimeScoreTerms TimeDiscriminatorImpl::score_terms(const torch::Tensor& frames,
                                                  const torch::Tensor& times,
                                                  const torch::Tensor& actor_ids,
                                                  const torch::Tensor& action_ids, double lambda) {
  if (!cfg_.conditional) return score_terms_embedded(frames, times, {}, {}, lambda);
  if (actor_ids.numel() > 0 && (actor_ids.min().item<int64_t>() < 0 ||
                                actor_ids.max().item<int64_t>() >= cfg_.n_actors)) {
    throw LookupError("D_t: actor id out of range");
  }
  if (action_ids.numel() > 0 && (action_ids.min().item<int64_t>() < 0 ||
                                 action_ids.max().item<int64_t>() >= cfg_.n_actions)) {
    throw LookupError("D_t: action id out of range");
  }
  return score_terms_embedded(frames, times, actor_table.index_select(0, actor_ids),
                              action_table.index_select(0, action_ids), lambda);
}

torch::Tensor TimeDiscriminatorImpl::forward(const torch::Tensor& frames, const torch::Tensor& times,
                                             const torch::Tensor& actor_ids,
                                             const torch::Tensor& action_ids, double lambda) {
  return score_terms(frames, times, actor_ids, action_ids, lambda).total();
}

torch::Tensor TimeDiscriminatorImpl::score_single(const torch::Tensor& frame,
                                                  const torch::Tensor& time,
                                                  const torch::Tensor& actor_ids,
                                                  const torch::Tensor& action_ids, double lambda) {
  if (cfg_.n_frames != 1) throw ConfigError("dt_score_single: D_t was built for multiple frames");
  return forward(frame.unsqueeze(1), time.reshape({-1, 1}), actor_ids, action_ids, lambda);
}

}  // namespace tempostyle
