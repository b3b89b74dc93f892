#include "tempostyle/training.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tempostyle/dataio.hpp"

namespace tempostyle {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (schema_version != 1) throw ConfigError("train: unsupported schema_version");
  if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (total_iters < 1) throw ConfigError("train: total_iters must be positive");
  if (!(g_lr > 0) || !(d_lr > 0)) throw ConfigError("train: learning rates must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) throw ConfigError("train: betas must be in [0, 1)");
  if (!(adam_eps > 0)) throw ConfigError("train: adam_eps must be positive");
  if (r1_gamma < 0) throw ConfigError("train: r1_gamma must be >= 0");
  if (r1_interval < 1) throw ConfigError("train: r1_interval must be >= 1");
  if (!(t2v_lr_mul > 0)) throw ConfigError("train: t2v_lr_mul must be positive");
  if (log_every < 1 || checkpoint_every < 1) throw ConfigError("train: log/checkpoint intervals must be positive");
  if (threads < 1) throw ConfigError("train: threads must be positive");
  ramp.validate();
  model.validate();
}

double TrainConfig::lambda_at(int64_t iter) const { return use_ramp ? tempostyle::ramp(this->ramp, iter) : 1.0; }

Json to_json(const TrainConfig& c) {
  return Json{{"schema_version", c.schema_version},
              {"dataset", c.dataset},
              {"seed", c.seed},
              {"batch_size", c.batch_size},
              {"total_iters", c.total_iters},
              {"g_lr", c.g_lr},
              {"d_lr", c.d_lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"r1_gamma", c.r1_gamma},
              {"r1_interval", c.r1_interval},
              {"t2v_lr_mul", c.t2v_lr_mul},
              {"ramp", {{"start_iter", c.ramp.start_iter}, {"end_iter", c.ramp.end_iter}}},
              {"use_ramp", c.use_ramp},
              {"log_every", c.log_every},
              {"checkpoint_every", c.checkpoint_every},
              {"threads", c.threads},
              {"model", to_json(c.model)}};
}

TrainConfig train_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("train: config must be a JSON object");
  require_known_keys(j,
                     {"schema_version", "dataset", "seed", "batch_size", "total_iters", "g_lr", "d_lr",
                      "beta1", "beta2", "adam_eps", "r1_gamma", "r1_interval", "t2v_lr_mul", "ramp", "use_ramp",
                      "log_every", "checkpoint_every", "threads", "model"},
                     "train");
  TrainConfig c;
  try {
    c.schema_version = json_get_or(j, "schema_version", c.schema_version);
    c.dataset = json_get_or(j, "dataset", c.dataset);
    c.seed = json_get_or(j, "seed", c.seed);
    c.batch_size = json_get_or(j, "batch_size", c.batch_size);
    c.total_iters = json_get_or(j, "total_iters", c.total_iters);
    c.g_lr = json_get_or(j, "g_lr", c.g_lr);
    c.d_lr = json_get_or(j, "d_lr", c.d_lr);
    c.beta1 = json_get_or(j, "beta1", c.beta1);
    c.beta2 = json_get_or(j, "beta2", c.beta2);
    c.adam_eps = json_get_or(j, "adam_eps", c.adam_eps);
    c.r1_gamma = json_get_or(j, "r1_gamma", c.r1_gamma);
    c.r1_interval = json_get_or(j, "r1_interval", c.r1_interval);
    c.t2v_lr_mul = json_get_or(j, "t2v_lr_mul", c.t2v_lr_mul);
    if (auto it = j.find("ramp"); it != j.end()) {
      require_known_keys(*it, {"start_iter", "end_iter"}, "train.ramp");
      c.ramp.start_iter = json_get_or(*it, "start_iter", c.ramp.start_iter);
      c.ramp.end_iter = json_get_or(*it, "end_iter", c.ramp.end_iter);
    }
    c.use_ramp = json_get_or(j, "use_ramp", c.use_ramp);
    c.log_every = json_get_or(j, "log_every", c.log_every);
    c.checkpoint_every = json_get_or(j, "checkpoint_every", c.checkpoint_every);
    c.threads = json_get_or(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  if (auto it = j.find("model"); it != j.end()) c.model = model_config_from_json(*it);
  c.validate();
  return c;
}

void apply_variant(TrainConfig& cfg, const std::string& variant) {
  if (variant == "full") return;
  if (variant == "dt1") {
    cfg.model.dt_frames = 1;
  } else if (variant == "no-dt") {
    cfg.model.use_dt = false;
  } else if (variant == "no-ds") {
    cfg.model.use_ds = false;
  } else if (variant == "no-ramp") {
    cfg.use_ramp = false;
  } else if (variant == "unconditional") {
    cfg.model.conditional = false;
  } else if (variant.size() > 1 && variant[0] == 'k' &&
             variant.find_first_not_of("0123456789", 1) == std::string::npos) {
    cfg.model.k = std::stoll(variant.substr(1));
  } else {
    throw ConfigError("unknown ablation variant '" + variant + "'");
  }
  cfg.validate();
}

torch::Tensor nonsaturating_g_loss(const torch::Tensor& fake_logits) {
  return torch::nn::functional::softplus(-fake_logits).mean();
}

torch::Tensor logistic_d_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
  return torch::nn::functional::softplus(fake_logits).mean() +
         torch::nn::functional::softplus(-real_logits).mean();
}

torch::Tensor r1_penalty(const torch::Tensor& real_logits, const std::vector<torch::Tensor>& inputs,
                         double gamma) {
  auto grads = torch::autograd::grad({real_logits.sum()}, inputs, {}, /*retain_graph=*/true,
                                     /*create_graph=*/true, /*allow_unused=*/true);
  torch::Tensor sq;
  for (const auto& g : grads) {
    if (!g.defined()) continue;
    auto s = g.square().reshape({g.size(0), -1}).sum(1);
    sq = sq.defined() ? sq + s : s;
  }
  if (!sq.defined()) return torch::zeros({}, real_logits.options());
  return 0.5 * gamma * sq.mean();
}

Adam::Adam(std::vector<std::pair<std::string, torch::Tensor>> params, Options opt)
    : opt_(opt), params_(std::move(params)) {
  for (const auto& [name, p] : params_) {
    m_.push_back(torch::zeros_like(p));
    v_.push_back(torch::zeros_like(p));
  }
  lr_scale_.assign(params_.size(), 1.0);
}

void Adam::scale_lr(const std::string& prefix, double mul) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].first.rfind(prefix, 0) == 0) lr_scale_[i] = mul;
  }
}

void Adam::zero_grad() {
  for (auto& [name, p] : params_) p.mutable_grad().reset();
}

void Adam::step() {
  torch::NoGradGuard guard;
  ++steps_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].second;
    const auto& g = p.grad();
    if (!g.defined()) continue;
    m_[i].mul_(opt_.beta1).add_(g, 1.0 - opt_.beta1);
    v_[i].mul_(opt_.beta2).addcmul_(g, g, 1.0 - opt_.beta2);
    auto denom = (v_[i] / bc2).sqrt_().add_(opt_.eps);
    p.addcdiv_(m_[i], denom, -opt_.lr * lr_scale_[i] / bc1);
  }
}

void Adam::save_state(Checkpoint& ckpt, const std::string& prefix) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ckpt.tensors.emplace_back(prefix + params_[i].first + ".m", m_[i].clone());
    ckpt.tensors.emplace_back(prefix + params_[i].first + ".v", v_[i].clone());
  }
}

void Adam::load_state(const Checkpoint& ckpt, const std::string& prefix, int64_t steps) {
  torch::NoGradGuard guard;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i].copy_(ckpt.at(prefix + params_[i].first + ".m"));
    v_[i].copy_(ckpt.at(prefix + params_[i].first + ".v"));
  }
  steps_ = steps;
}

FrameTriplet sample_real_triplet(const VideoClip& clip, std::mt19937_64& rng) {
  const int64_t n = clip.length();
  if (n < 3) throw DomainError("sample_real_triplet: clip shorter than 3 frames");
  std::uniform_int_distribution<int64_t> pick(0, n - 3);
  FrameTriplet t;
  t.start = pick(rng);
  t.frames = clip.frames.slice(0, t.start, t.start + 3);
  t.times = torch::tensor(std::vector<float>{static_cast<float>(clip.timepoints[t.start]),
                                             static_cast<float>(clip.timepoints[t.start + 1]),
                                             static_cast<float>(clip.timepoints[t.start + 2])});
  return t;
}

Json to_json(const IterationStats& s) {
  Json j{{"iter", s.iter}, {"g_loss", s.g_loss}, {"d_loss", s.d_loss}, {"lambda", s.lambda}};
  j["r1"] = s.r1 ? Json(*s.r1) : Json(nullptr);
  return j;
}

namespace {

std::vector<std::pair<std::string, torch::Tensor>> named_subset(const torch::nn::Module& model,
                                                                const std::vector<std::string>& prefixes) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& item : model.named_parameters(true)) {
    for (const auto& p : prefixes) {
      if (item.key().rfind(p + ".", 0) == 0) {
        out.emplace_back(item.key(), item.value());
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> d_prefixes(const ModelConfig& m) {
  std::vector<std::string> p;
  if (m.use_ds) p.push_back("ds");
  if (m.use_dt) p.push_back("dt");
  return p;
}

const std::vector<std::string> kGeneratorPrefixes{"t2v", "mapper", "fc", "g"};

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<VideoClip> clips, LabelVocabulary vocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), rng_(cfg_.seed) {
  cfg_.validate();
  at::set_num_threads(cfg_.threads);
  for (auto& c : clips) {
    if (c.length() < 3) {
      std::cerr << "warning: skipping clip with " << c.length() << " frames (need >= 3)\n";
      continue;
    }
    if (cfg_.model.conditional && !c.label) throw ConfigError("train: conditional training needs labelled clips");
    c.frames = c.frames.to(torch::kFloat32).contiguous();
    clips_.push_back(std::move(c));
  }
  if (clips_.empty()) throw ConfigError("train: no usable training clips");
  if (static_cast<int>(vocab_.actors.size()) != cfg_.model.n_actors ||
      static_cast<int>(vocab_.actions.size()) != cfg_.model.n_actions) {
    throw ConfigError("train: model label counts do not match the corpus vocabulary");
  }
  for (const auto& c : clips_) {
    if (c.frames.size(2) != cfg_.model.resolution || c.frames.size(3) != cfg_.model.resolution) {
      throw ShapeError("train: clip resolution differs from model resolution");
    }
  }

  torch::manual_seed(cfg_.seed);
  gen_ = at::make_generator<at::CPUGeneratorImpl>(cfg_.seed);
  model_ = VideoGAN(cfg_.model);

  g_opt_ = std::make_unique<Adam>(named_subset(*model_, kGeneratorPrefixes),
                                  Adam::Options{cfg_.g_lr, cfg_.beta1, cfg_.beta2, cfg_.adam_eps});
  // Lazy R1: the extra regularization steps are compensated in lr and betas.
  const double c = static_cast<double>(cfg_.r1_interval) / (cfg_.r1_interval + 1.0);
  d_opt_ = std::make_unique<Adam>(
      named_subset(*model_, d_prefixes(cfg_.model)),
      Adam::Options{cfg_.d_lr * c, std::pow(cfg_.beta1, c), std::pow(cfg_.beta2, c), cfg_.adam_eps});
  g_opt_->scale_lr("t2v.", cfg_.t2v_lr_mul);
  for (const auto& item : model_->named_parameters(true)) grad_seen_[item.key()] = false;
}

Trainer Trainer::resume(const Checkpoint& ckpt, std::vector<VideoClip> clips) {
  const auto& man = ckpt.manifest;
  Trainer t(train_config_from_json(man.at("train")), std::move(clips),
            vocabulary_from_json(man.at("vocabulary")));
  restore_model_tensors(*t.model_, ckpt);
  t.g_opt_->load_state(ckpt, "opt.g.", man.at("g_opt_steps").get<int64_t>());
  t.d_opt_->load_state(ckpt, "opt.d.", man.at("d_opt_steps").get<int64_t>());
  t.iter_ = man.at("iteration").get<int64_t>();
  std::istringstream rs(man.at("rng").get<std::string>());
  rs >> t.rng_;
  t.gen_.set_state(ckpt.at("rng.torch"));
  return t;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  std::ostringstream rs;
  rs << rng_;
  ck.manifest = Json{{"kind", "tempostyle-train"},
                     {"iteration", iter_},
                     {"model", to_json(cfg_.model)},
                     {"train", to_json(cfg_)},
                     {"vocabulary", to_json(vocab_)},
                     {"rng", rs.str()},
                     {"g_opt_steps", g_opt_->steps()},
                     {"d_opt_steps", d_opt_->steps()}};
  add_model_tensors(ck, *model_);
  g_opt_->save_state(ck, "opt.g.");
  d_opt_->save_state(ck, "opt.d.");
  ck.tensors.emplace_back("rng.torch", gen_.get_state());
  return ck;
}

std::vector<std::string> Trainer::parameters_without_gradient() const {
  std::vector<std::string> out;
  for (const auto& [name, seen] : grad_seen_) {
    if (!seen) out.push_back(name);
  }
  return out;
}

Trainer::Batch Trainer::real_batch() {
  const int64_t b = cfg_.batch_size;
  std::uniform_int_distribution<std::size_t> pick(0, clips_.size() - 1);
  std::vector<torch::Tensor> frames, times;
  std::vector<int64_t> actors, actions;
  Batch out;
  for (int64_t i = 0; i < b; ++i) {
    const std::size_t ci = pick(rng_);
    const auto& clip = clips_[ci];
    auto trip = sample_real_triplet(clip, rng_);
    frames.push_back(trip.frames);
    times.push_back(trip.times);
    actors.push_back(clip.label ? clip.label->actor_id : 0);
    actions.push_back(clip.label ? clip.label->action_id : 0);
    out.clip_ids.push_back(static_cast<int64_t>(ci));
  }
  out.frames = torch::stack(frames);
  out.times = torch::stack(times);
  out.actor_ids = torch::tensor(actors, torch::kInt64);
  out.action_ids = torch::tensor(actions, torch::kInt64);
  return out;
}

torch::Tensor Trainer::content_for(const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                                   double lambda) {
  if (cfg_.model.conditional) return model_->content(actor_ids, action_ids, lambda);
  auto z_c = torch::randn({actor_ids.size(0), 2 * cfg_.model.embed_dim}, gen_);
  return model_->content(actor_ids, action_ids, lambda, z_c);
}

torch::Tensor Trainer::dt_logits(const torch::Tensor& frames, const torch::Tensor& times,
                                 const torch::Tensor& actor_ids, const torch::Tensor& action_ids,
                                 double lambda) {
  if (cfg_.model.dt_frames == 3) return model_->dt->forward(frames, times, actor_ids, action_ids, lambda);
  // One time-point: every frame of the triplet is scored on its own.
  const int64_t b = frames.size(0), n = frames.size(1);
  auto f = frames.reshape({b * n, 1, frames.size(2), frames.size(3), frames.size(4)});
  auto t = times.reshape({b * n, 1});
  return model_->dt->forward(f, t, actor_ids.repeat_interleave(n), action_ids.repeat_interleave(n), lambda);
}

void Trainer::set_discriminator_grad(bool on) {
  if (model_->ds) {
    for (auto& p : model_->ds->parameters()) p.requires_grad_(on);
  }
  if (model_->dt) {
    for (auto& p : model_->dt->parameters()) p.requires_grad_(on);
  }
}

void Trainer::note_gradients() {
  torch::NoGradGuard guard;
  for (const auto& item : model_->named_parameters(true)) {
    auto& seen = grad_seen_[item.key()];
    if (seen) continue;
    const auto& g = item.value().grad();
    if (g.defined() && g.ne(0).any().item<bool>()) seen = true;
  }
}

IterationStats Trainer::step() {
  auto& gen = gen_;
  const int64_t b = cfg_.batch_size;
  const double lambda = cfg_.lambda_at(iter_);
  IterationStats stats;
  stats.iter = iter_;
  stats.lambda = lambda;
  model_->train();

  // Discriminator step.
  auto real = real_batch();
  torch::Tensor fake, fake_t;
  {
    torch::NoGradGuard guard;
    auto z = torch::randn({b, cfg_.model.z_dim}, gen);
    fake_t = real.times.clone();
    auto w_c = content_for(real.actor_ids, real.action_ids, lambda);
    fake = model_->render(w_c, model_->mapper->forward(z), fake_t);
  }
  set_discriminator_grad(true);
  d_opt_->zero_grad();
  g_opt_->zero_grad();
  torch::Tensor d_loss = torch::zeros({});
  std::vector<int64_t> sigma;
  if (cfg_.model.use_dt) {
    auto rl = dt_logits(real.frames, real.times, real.actor_ids, real.action_ids, lambda);
    auto fl = dt_logits(fake, fake_t, real.actor_ids, real.action_ids, lambda);
    d_loss = d_loss + logistic_d_loss(rl, fl);
  }
  if (cfg_.model.use_ds) {
    auto shuffled = shuffle_pairs(fake.select(1, 0), fake.select(1, 1), rng_);
    sigma = shuffled.sigma;
    auto rl = model_->ds->forward(real.frames.select(1, 0), real.frames.select(1, 1));
    auto fl = model_->ds->forward(shuffled.first, shuffled.second);
    d_loss = d_loss + logistic_d_loss(rl, fl);
  }
  stats.d_loss = d_loss.item<double>();

  auto diverged = [&](const std::string& what) {
    Json dump{{"iteration", iter_},
              {"lambda", lambda},
              {"d_loss", stats.d_loss},
              {"g_loss", stats.g_loss},
              {"r1", stats.r1 ? Json(*stats.r1) : Json(nullptr)},
              {"clip_ids", real.clip_ids},
              {"sigma", sigma}};
    std::vector<float> ft(fake_t.data_ptr<float>(), fake_t.data_ptr<float>() + fake_t.numel());
    dump["fake_times"] = ft;
    throw TrainingDiverged("non-finite " + what + " at iteration " + std::to_string(iter_), dump);
  };
  if (!std::isfinite(stats.d_loss)) diverged("d_loss");
  d_loss.backward();
  note_gradients();
  d_opt_->step();

  if (cfg_.r1_gamma > 0 && iter_ % cfg_.r1_interval == 0) {
    d_opt_->zero_grad();
    auto x = real.frames.detach().clone().requires_grad_(true);
    torch::Tensor r1 = torch::zeros({});
    if (cfg_.model.use_dt) {
      auto rl = dt_logits(x, real.times, real.actor_ids, real.action_ids, lambda);
      r1 = r1 + r1_penalty(rl, {x}, cfg_.r1_gamma);
    }
    if (cfg_.model.use_ds) {
      auto rl = model_->ds->forward(x.select(1, 0), x.select(1, 1));
      r1 = r1 + r1_penalty(rl, {x}, cfg_.r1_gamma);
    }
    stats.r1 = r1.item<double>();
    if (!std::isfinite(*stats.r1)) diverged("r1");
    (r1 * static_cast<double>(cfg_.r1_interval)).backward();
    note_gradients();
    d_opt_->step();
  }

  // Generator step.
  set_discriminator_grad(false);
  d_opt_->zero_grad();
  g_opt_->zero_grad();
  auto labels = real_batch();  // fresh label draw from the training distribution
  auto z = torch::randn({b, cfg_.model.z_dim}, gen);
  auto g_times = labels.times;
  auto w_c = content_for(labels.actor_ids, labels.action_ids, lambda);
  auto gen_frames = model_->render(w_c, model_->mapper->forward(z), g_times);
  torch::Tensor g_loss = torch::zeros({});
  if (cfg_.model.use_dt) {
    g_loss = g_loss + nonsaturating_g_loss(
                          dt_logits(gen_frames, g_times, labels.actor_ids, labels.action_ids, lambda));
  }
  if (cfg_.model.use_ds) {
    g_loss = g_loss + nonsaturating_g_loss(
                          model_->ds->forward(gen_frames.select(1, 0), gen_frames.select(1, 1)));
  }
  stats.g_loss = g_loss.item<double>();
  if (!std::isfinite(stats.g_loss)) diverged("g_loss");
  g_loss.backward();
  note_gradients();
  g_opt_->step();
  set_discriminator_grad(true);

  ++iter_;
  return stats;
}

Checkpoint run_training(const TrainConfig& cfg_in, const TrainRunOptions& opts) {
  fs::create_directories(opts.out_dir);
  std::optional<Checkpoint> resume_ck;
  TrainConfig cfg = cfg_in;
  const auto t_start = std::chrono::steady_clock::now();
  double prior_seconds = 0.0;
  if (opts.resume) {
    resume_ck = load_checkpoint(*opts.resume);
    prior_seconds = json_get_or(resume_ck->manifest, "train_seconds", 0.0);
    cfg = train_config_from_json(resume_ck->manifest.at("train"));
    cfg.total_iters = cfg_in.total_iters;
  }
  cfg.validate();
  auto index = load_index(cfg.dataset);
  auto clips = load_split(cfg.dataset, "train");
  Trainer trainer = resume_ck ? Trainer::resume(*resume_ck, std::move(clips))
                              : Trainer(cfg, std::move(clips), index.vocabulary);
  if (resume_ck) resume_ck.reset();

  const auto metrics_path = fs::path(opts.out_dir) / "metrics.ndjson";
  std::ofstream metrics(metrics_path, opts.resume ? std::ios::app : std::ios::trunc);
  if (!metrics) throw IoError("cannot open " + metrics_path.string());

  // Wall time accumulates across resumed segments.
  auto stamped = [&](Checkpoint ck) {
    ck.manifest["train_seconds"] =
        prior_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return ck;
  };
  auto ckpt_name = [](int64_t it) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_%06lld.ckpt", static_cast<long long>(it));
    return std::string(buf);
  };

  while (trainer.iteration() < cfg.total_iters) {
    IterationStats s;
    try {
      s = trainer.step();
    } catch (const TrainingDiverged& e) {
      write_json_file_atomic((fs::path(opts.out_dir) / "abort_dump.json").string(), e.dump());
      save_checkpoint((fs::path(opts.out_dir) / "abort.ckpt").string(), stamped(trainer.checkpoint()));
      throw;
    }
    const bool last = trainer.iteration() == cfg.total_iters;
    if (trainer.iteration() % cfg.log_every == 0 || s.r1 || last) {
      metrics << to_json(s).dump() << '\n';
      metrics.flush();
      if (opts.on_log) opts.on_log(s);
    }
    if (trainer.iteration() % cfg.checkpoint_every == 0 && !last) {
      save_checkpoint((fs::path(opts.out_dir) / ckpt_name(trainer.iteration())).string(),
                      stamped(trainer.checkpoint()));
    }
  }
  auto final_ck = stamped(trainer.checkpoint());
  save_checkpoint((fs::path(opts.out_dir) / "final.ckpt").string(), final_ck);
  return final_ck;
}

double checkpoint_lambda(const Checkpoint& ckpt) {
  const auto& man = ckpt.manifest;
  if (!man.contains("train") || !man.contains("iteration")) return 1.0;
  const auto iter = man.at("iteration").get<int64_t>();
  return train_config_from_json(man.at("train")).lambda_at(std::max<int64_t>(iter - 1, 0));
}

}  // namespace tempostyle
