#include "tempostyle/model.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <string>

#include "tempostyle/errors.hpp"

namespace tempostyle {

GeneratorConfig ModelConfig::generator() const {
  GeneratorConfig g;
  g.resolution = resolution;
  g.channels = g_channels;
  g.c_dim = c_dim;
  g.k = k;
  return g;
}

TimeDiscriminatorConfig ModelConfig::time_discriminator() const {
  TimeDiscriminatorConfig d;
  d.resolution = resolution;
  d.channels = d_channels;
  d.n_frames = dt_frames;
  d.feat_dim = dt_feat_dim;
  d.time_k = dt_time_k;
  d.embed_dim = embed_dim;
  d.conditional = conditional;
  d.n_actors = n_actors;
  d.n_actions = n_actions;
  d.max_clip_len = max_clip_len;
  return d;
}

void ModelConfig::validate() const {
  generator().validate();
  if (k < 2) throw ConfigError("model: k must be >= 2");
  if (z_dim < 1 || mapper_hidden < 1 || c_dim < 1 || embed_dim < 1) {
    throw ConfigError("model: dimensions must be positive");
  }
  if (mapper_lr_mul <= 0.0) throw ConfigError("model: mapper_lr_mul must be positive");
  if (n_actors < 1 || n_actions < 1) throw ConfigError("model: empty label vocabulary");
  if (max_clip_len < 3) throw ConfigError("model: max_clip_len must be >= 3");
  if (dt_frames != 1 && dt_frames != 3) throw ConfigError("model: dt_frames must be 1 or 3");
  if (static_cast<int>(d_channels.size()) != trunk_stage_count(resolution) + 1) {
    throw ConfigError("model: d_channels needs " + std::to_string(trunk_stage_count(resolution) + 1) +
                      " entries for resolution " + std::to_string(resolution));
  }
  if (!use_dt && !use_ds) throw ConfigError("model: at least one discriminator is required");
}

Json to_json(const ModelConfig& c) {
  Json ch = Json::object();
  for (auto [r, n] : c.g_channels) ch[std::to_string(r)] = n;
  return Json{{"resolution", c.resolution},
              {"g_channels", ch},
              {"d_channels", c.d_channels},
              {"k", c.k},
              {"z_dim", c.z_dim},
              {"mapper_hidden", c.mapper_hidden},
              {"mapper_lr_mul", c.mapper_lr_mul},
              {"c_dim", c.c_dim},
              {"embed_dim", c.embed_dim},
              {"conditional", c.conditional},
              {"n_actors", c.n_actors},
              {"n_actions", c.n_actions},
              {"max_clip_len", c.max_clip_len},
              {"use_dt", c.use_dt},
              {"use_ds", c.use_ds},
              {"dt_frames", c.dt_frames},
              {"dt_feat_dim", c.dt_feat_dim},
              {"dt_time_k", c.dt_time_k}};
}

ModelConfig model_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"resolution", "g_channels", "d_channels", "k", "z_dim", "mapper_hidden",
                      "mapper_lr_mul", "c_dim", "embed_dim", "conditional", "n_actors",
                      "n_actions", "max_clip_len", "use_dt", "use_ds", "dt_frames", "dt_feat_dim",
                      "dt_time_k"},
                     "model");
  ModelConfig c;
  try {
    c.resolution = json_get_or(j, "resolution", c.resolution);
    if (j.contains("g_channels")) {
      c.g_channels.clear();
      for (auto it = j["g_channels"].begin(); it != j["g_channels"].end(); ++it) {
        c.g_channels[std::stoi(it.key())] = it->get<int>();
      }
    }
    c.d_channels = json_get_or(j, "d_channels", c.d_channels);
    c.k = json_get_or(j, "k", c.k);
    c.z_dim = json_get_or(j, "z_dim", c.z_dim);
    c.mapper_hidden = json_get_or(j, "mapper_hidden", c.mapper_hidden);
    c.mapper_lr_mul = json_get_or(j, "mapper_lr_mul", c.mapper_lr_mul);
    c.c_dim = json_get_or(j, "c_dim", c.c_dim);
    c.embed_dim = json_get_or(j, "embed_dim", c.embed_dim);
    c.conditional = json_get_or(j, "conditional", c.conditional);
    c.n_actors = json_get_or(j, "n_actors", c.n_actors);
    c.n_actions = json_get_or(j, "n_actions", c.n_actions);
    c.max_clip_len = json_get_or(j, "max_clip_len", c.max_clip_len);
    c.use_dt = json_get_or(j, "use_dt", c.use_dt);
    c.use_ds = json_get_or(j, "use_ds", c.use_ds);
    c.dt_frames = json_get_or(j, "dt_frames", c.dt_frames);
    c.dt_feat_dim = json_get_or(j, "dt_feat_dim", c.dt_feat_dim);
    c.dt_time_k = json_get_or(j, "dt_time_k", c.dt_time_k);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("model config: g_channels keys must be integers");
  }
  c.validate();
  return c;
}

VideoGANImpl::VideoGANImpl(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  t2v = register_module("t2v", Time2Vec(init_time2vec(static_cast<int>(cfg_.k), cfg_.max_clip_len)));
  mapper = register_module("mapper",
                           MotionMapper(cfg_.z_dim, cfg_.mapper_hidden, cfg_.k, cfg_.mapper_lr_mul));
  fc = register_module("fc", ContentEncoder(cfg_.n_actors, cfg_.n_actions, cfg_.embed_dim,
                                            cfg_.c_dim, cfg_.conditional));
  g = register_module("g", SynthesisNetwork(cfg_.generator()));
  if (cfg_.use_ds) ds = register_module("ds", ShuffleDiscriminator(cfg_.resolution, cfg_.d_channels));
  if (cfg_.use_dt) dt = register_module("dt", TimeDiscriminator(cfg_.time_discriminator()));
}

torch::Tensor VideoGANImpl::content(const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                                    double lambda, const torch::Tensor& z_c) {
  if (cfg_.conditional) return fc->forward(actor_ids, action_ids, lambda);
  if (!z_c.defined()) throw ConfigError("unconditional model needs a content noise vector");
  return fc->from_noise(z_c);
}

torch::Tensor VideoGANImpl::styles(const torch::Tensor& w_c, const torch::Tensor& m,
                                   const torch::Tensor& times) {
  if (m.size(-1) != cfg_.k) throw ShapeError("motion style has the wrong dimension");
  auto w_t = temporal_styles(m, t2v->forward(times));  // [B, n, k]
  auto wc = w_c.unsqueeze(1).expand({-1, times.size(1), -1});
  return torch::cat({wc, w_t}, -1);
}

torch::Tensor VideoGANImpl::render(const torch::Tensor& w_c, const torch::Tensor& m,
                                   const torch::Tensor& times) {
  auto s = styles(w_c, m, times);
  const int64_t b = s.size(0), n = s.size(1);
  auto img = g->forward(s.reshape({b * n, s.size(2)}));
  return img.reshape({b, n, 3, img.size(2), img.size(3)});
}

VideoClip VideoGANImpl::render_clip(const torch::Tensor& w_c, const torch::Tensor& m,
                                    const std::vector<double>& timepoints) {
  torch::NoGradGuard guard;
  VideoClip clip;
  clip.timepoints = timepoints;
  if (timepoints.empty()) {
    clip.frames = torch::zeros({0, 3, cfg_.resolution, cfg_.resolution});
    return clip;
  }
  auto times = torch::tensor(timepoints, torch::kFloat64).to(torch::kFloat32);
  constexpr int64_t kChunk = 64;
  std::vector<torch::Tensor> parts;
  for (int64_t s = 0; s < times.size(0); s += kChunk) {
    auto ts = times.narrow(0, s, std::min(kChunk, times.size(0) - s)).unsqueeze(0);
    parts.push_back(render(w_c.reshape({1, -1}), m.reshape({1, -1}), ts).squeeze(0));
  }
  clip.frames = torch::cat(parts, 0).clamp(-1.0, 1.0).contiguous();
  return clip;
}

VideoClip VideoGANImpl::generate_video(const MotionNoise& z_m, const ConditionLabel& label,
                                       const std::vector<double>& timepoints, double lambda) {
  if (!cfg_.conditional) throw ConfigError("generate_video: labels given to an unconditional model");
  fc->check_label(label);
  torch::NoGradGuard guard;
  auto z = torch::tensor(z_m.z, torch::kFloat64).to(torch::kFloat32).unsqueeze(0);
  auto m = mapper->forward(z);
  auto ids = [](int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); };
  auto w_c = content(ids(label.actor_id), ids(label.action_id), lambda);
  auto clip = render_clip(w_c, m, timepoints);
  clip.label = label;
  return clip;
}

namespace {
std::vector<torch::Tensor> params_of(const torch::nn::Module& m) { return m.parameters(true); }
}  // namespace

std::vector<torch::Tensor> VideoGANImpl::generator_parameters() const {
  std::vector<torch::Tensor> out;
  for (const torch::nn::Module* m :
       {static_cast<const torch::nn::Module*>(t2v.get()), static_cast<const torch::nn::Module*>(mapper.get()),
        static_cast<const torch::nn::Module*>(fc.get()), static_cast<const torch::nn::Module*>(g.get())}) {
    auto p = params_of(*m);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<torch::Tensor> VideoGANImpl::synthesis_parameters() const { return params_of(*g); }

std::vector<torch::Tensor> VideoGANImpl::discriminator_parameters() const {
  std::vector<torch::Tensor> out;
  if (ds) {
    auto p = params_of(*ds);
    out.insert(out.end(), p.begin(), p.end());
  }
  if (dt) {
    auto p = params_of(*dt);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

MotionNoise seeded_motion_noise(int64_t z_dim, uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto z = torch::randn({z_dim}, gen, torch::kFloat64).contiguous();
  MotionNoise n;
  n.z.assign(z.data_ptr<double>(), z.data_ptr<double>() + z.numel());
  return n;
}

VideoGAN clone_model(const VideoGAN& src) {
  VideoGAN dst(src->config());
  torch::NoGradGuard guard;
  const auto params = src->parameters();
  if (!params.empty()) dst->to(params.front().scalar_type());
  auto from = src->named_parameters(true);
  auto to = dst->named_parameters(true);
  for (auto& item : from) to[item.key()].copy_(item.value());
  return dst;
}

uint64_t parameter_hash(const std::vector<torch::Tensor>& params) {
  uint64_t h = 14695981039346656037ull;
  for (const auto& p : params) {
    auto c = p.detach().contiguous();
    h = fnv1a64(std::string_view(static_cast<const char*>(c.data_ptr()),
                                 static_cast<std::size_t>(c.nbytes())),
                h);
  }
  return h;
}

}  // namespace tempostyle
