#include "tempostyle/inversion.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <limits>

#include "tempostyle/errors.hpp"
#include "tempostyle/json_util.hpp"
#include "tempostyle/training.hpp"

namespace tempostyle {

void InversionConfig::validate() const {
  if (steps < 1) throw ConfigError("inversion: steps must be positive");
  if (!(lr > 0)) throw ConfigError("inversion: lr must be positive");
  if (max_frames < 1 || max_frames > 120) throw ConfigError("inversion: max_frames must be in [1, 120]");
  if (restarts < 0 || restart_steps < 0) throw ConfigError("inversion: restarts must be >= 0");
  if (weights.perceptual < 0 || weights.mse < 0) throw ConfigError("inversion: loss weights must be >= 0");
}

void TuneConfig::validate() const {
  if (steps < 0) throw ConfigError("tune: steps must be >= 0");
  if (!(lr > 0)) throw ConfigError("tune: lr must be positive");
  if (max_frames < 1 || max_frames > 120) throw ConfigError("tune: max_frames must be in [1, 120]");
  if (!(divergence_factor > 1)) throw ConfigError("tune: divergence_factor must exceed 1");
}

namespace {

struct Target {
  torch::Tensor frames;  // [n, 3, H, W]
  torch::Tensor times;   // [1, n]
  torch::Tensor w_c;     // [1, c]
};

Target make_target(VideoGAN& model, const VideoClip& clip, const ConditionLabel& label,
                   int64_t max_frames, double lambda) {
  const auto& cfg = model->config();
  if (!cfg.conditional) throw ConfigError("inversion needs a conditional model");
  model->fc->check_label(label);
  clip.validate();
  if (clip.length() < 1) throw DomainError("inversion: empty clip");
  if (clip.frames.size(2) != cfg.resolution || clip.frames.size(3) != cfg.resolution) {
    throw ShapeError("inversion: clip resolution differs from the model");
  }
  const int64_t n = std::min<int64_t>(clip.length(), max_frames);
  Target t;
  t.frames = clip.frames.narrow(0, 0, n).to(torch::kFloat32);
  std::vector<double> tp(clip.timepoints.begin(), clip.timepoints.begin() + n);
  t.times = torch::tensor(tp, torch::kFloat64).to(torch::kFloat32).unsqueeze(0);
  torch::NoGradGuard guard;
  auto ids = [](int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); };
  t.w_c = model->content(ids(label.actor_id), ids(label.action_id), lambda);
  return t;
}

torch::Tensor reconstruction_loss(VideoGAN& model, const Target& t, const torch::Tensor& m,
                                  const PerceptualDistance& dist) {
  auto out = model->render(t.w_c, m, t.times).squeeze(0).clamp(-1.0, 1.0);
  return dist.per_frame(out, t.frames).mean();
}

/// Adam on a single tensor with standard betas.
struct TensorAdam {
  torch::Tensor m1, m2;
  int64_t n = 0;
  double lr;
  explicit TensorAdam(const torch::Tensor& like, double lr_) : lr(lr_) {
    m1 = torch::zeros_like(like);
    m2 = torch::zeros_like(like);
  }
  void step(torch::Tensor& x, const torch::Tensor& g) {
    torch::NoGradGuard guard;
    ++n;
    m1.mul_(0.9).add_(g, 0.1);
    m2.mul_(0.999).addcmul_(g, g, 0.001);
    const double bc1 = 1 - std::pow(0.9, n), bc2 = 1 - std::pow(0.999, n);
    x.addcdiv_(m1, (m2 / bc2).sqrt_().add_(1e-8), -lr / bc1);
  }
};

struct Candidate {
  torch::Tensor m;  // [1, k], requires grad
  std::unique_ptr<TensorAdam> opt;
  std::vector<double> trace;
  torch::Tensor best_m;
  double best = std::numeric_limits<double>::infinity();
  int64_t best_step = 0;
};

void run_steps(VideoGAN& model, const Target& t, const PerceptualDistance& dist, Candidate& c,
               int64_t until) {
  while (static_cast<int64_t>(c.trace.size()) <= until) {
    auto loss = reconstruction_loss(model, t, c.m, dist);
    const double v = loss.item<double>();
    if (!std::isfinite(v)) throw NumericalError("inversion: non-finite loss");
    const auto step = static_cast<int64_t>(c.trace.size());
    c.trace.push_back(v);
    if (v < c.best) {
      c.best = v;
      c.best_m = c.m.detach().clone();
      c.best_step = step;
    }
    if (step == until) break;  // the last entry is evaluated, not stepped
    auto g = torch::autograd::grad({loss}, {c.m})[0];
    c.opt->step(c.m, g);
  }
}

}  // namespace

InversionResult invert_motion(VideoGAN& model, const VideoClip& clip, const ConditionLabel& label,
                              const InversionConfig& cfg, const PerceptualDistance& dist) {
  cfg.validate();
  const int64_t k = model->config().k;
  auto target = make_target(model, clip, label, cfg.max_frames, cfg.lambda);

  std::vector<torch::Tensor> starts;
  if (cfg.init_m) {
    if (static_cast<int64_t>(cfg.init_m->size()) != k) throw ShapeError("inversion: init_m has the wrong length");
    starts.push_back(torch::tensor(*cfg.init_m, torch::kFloat64).to(torch::kFloat32).reshape({1, k}));
  } else {
    starts.push_back(torch::zeros({1, k}));
    auto gen = at::make_generator<at::CPUGeneratorImpl>(cfg.seed);
    torch::NoGradGuard guard;
    for (int r = 0; r < cfg.restarts; ++r) {
      starts.push_back(model->mapper->forward(torch::randn({1, model->config().z_dim}, gen)));
    }
  }

  std::vector<Candidate> cands(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    cands[i].m = starts[i].clone().requires_grad_(true);
    cands[i].opt = std::make_unique<TensorAdam>(cands[i].m, cfg.lr);
  }
  std::size_t chosen = 0;
  if (cands.size() > 1) {
    const int64_t probe = std::min(cfg.restart_steps, cfg.steps);
    for (auto& c : cands) run_steps(model, target, dist, c, probe);
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (cands[i].best < cands[chosen].best) chosen = i;
    }
  }
  auto& best = cands[chosen];
  run_steps(model, target, dist, best, cfg.steps);

  InversionResult r;
  r.trace = best.trace;
  r.initial_loss = cands[0].trace.front();
  r.best_loss = best.best;
  r.best_step = best.best_step;
  r.chosen_start = static_cast<int>(chosen);
  auto bm = best.best_m.to(torch::kFloat64).contiguous();
  r.m_star.m.assign(bm.data_ptr<double>(), bm.data_ptr<double>() + bm.numel());
  return r;
}

TuneResult pivotal_tune(const VideoGAN& model, const MotionStyle& m_star, const VideoClip& clip,
                        const ConditionLabel& label, const TuneConfig& cfg,
                        const PerceptualDistance& dist) {
  cfg.validate();
  TuneResult r;
  r.model = clone_model(model);
  auto& tuned = r.model;
  if (static_cast<int64_t>(m_star.m.size()) != tuned->config().k) {
    throw ShapeError("pivotal_tune: m_star has the wrong length");
  }
  auto target = make_target(tuned, clip, label, cfg.max_frames, cfg.lambda);
  auto m = torch::tensor(m_star.m, torch::kFloat64).to(torch::kFloat32).reshape({1, -1});

  auto evaluate = [&] {
    auto out = tuned->render(target.w_c, m, target.times).squeeze(0).clamp(-1.0, 1.0);
    auto loss = dist.per_frame(out, target.frames).mean();
    auto mse = PerceptualDistance::per_frame_mse(out, target.frames).mean();
    return std::make_pair(loss, mse);
  };

  std::vector<torch::Tensor> params = tuned->synthesis_parameters();
  std::vector<std::pair<std::string, torch::Tensor>> named;
  for (const auto& item : tuned->g->named_parameters(true)) named.emplace_back("g." + item.key(), item.value());
  Adam opt(named, Adam::Options{cfg.lr, 0.9, 0.999, 1e-8});

  auto snapshot = [&] {
    std::vector<torch::Tensor> s;
    for (const auto& p : params) s.push_back(p.detach().clone());
    return s;
  };
  {
    torch::NoGradGuard guard;
    auto [l0, e0] = evaluate();
    r.loss_before = l0.item<double>();
    r.mse_before = e0.item<double>();
  }
  if (!std::isfinite(r.loss_before)) throw NumericalError("pivotal_tune: non-finite initial loss");
  r.trace.push_back(r.loss_before);
  double best = r.loss_before;
  auto best_params = snapshot();

  for (int64_t s = 0; s < cfg.steps; ++s) {
    opt.zero_grad();
    auto [loss, mse] = evaluate();
    loss.backward();
    opt.step();
    double v;
    {
      torch::NoGradGuard guard;
      v = evaluate().first.item<double>();
    }
    r.trace.push_back(v);
    if (!std::isfinite(v) || v > cfg.divergence_factor * r.loss_before) {
      r.diverged = true;
      r.model = clone_model(model);
      r.loss_after = r.loss_before;
      r.mse_after = r.mse_before;
      return r;
    }
    if (v < best) {
      best = v;
      best_params = snapshot();
    }
  }
  {
    torch::NoGradGuard guard;
    if (cfg.steps > 0) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i].copy_(best_params[i]);
    }
    for (auto& p : tuned->parameters()) p.mutable_grad().reset();
    auto [l1, e1] = evaluate();
    r.loss_after = l1.item<double>();
    r.mse_after = e1.item<double>();
  }
  return r;
}

VideoClip transfer_motion(VideoGAN& model, const MotionStyle& m_star, const ConditionLabel& label,
                          const std::vector<double>& timepoints, double lambda) {
  if (!model->config().conditional) throw ConfigError("transfer_motion needs a conditional model");
  model->fc->check_label(label);
  if (static_cast<int64_t>(m_star.m.size()) != model->config().k) {
    throw ShapeError("transfer_motion: m_star has the wrong length");
  }
  torch::NoGradGuard guard;
  auto ids = [](int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); };
  auto w_c = model->content(ids(label.actor_id), ids(label.action_id), lambda);
  auto m = torch::tensor(m_star.m, torch::kFloat64).to(torch::kFloat32).reshape({1, -1});
  auto clip = model->render_clip(w_c, m, timepoints);
  clip.label = label;
  return clip;
}

torch::Tensor invert_frame_styles(VideoGAN& model, const VideoClip& clip, const ConditionLabel& label,
                                  int64_t steps_per_frame, double lr, const PerceptualDistance& dist,
                                  double lambda) {
  if (steps_per_frame < 1) throw ConfigError("invert_frame_styles: steps must be positive");
  auto target = make_target(model, clip, label, clip.length(), lambda);
  const int64_t n = target.frames.size(0);
  const int64_t k = model->config().k;
  auto w = torch::zeros({1, k});
  std::vector<torch::Tensor> out;
  for (int64_t i = 0; i < n; ++i) {
    auto wt = w.clone().requires_grad_(true);
    TensorAdam opt(wt, lr);
    auto frame = target.frames.narrow(0, i, 1);
    torch::Tensor best = wt.detach().clone();
    double best_loss = std::numeric_limits<double>::infinity();
    for (int64_t s = 0; s <= steps_per_frame; ++s) {
      auto styles = torch::cat({target.w_c, wt}, 1);
      auto img = model->g->forward(styles).clamp(-1.0, 1.0);
      auto loss = dist.per_frame(img, frame).mean();
      const double v = loss.item<double>();
      if (!std::isfinite(v)) throw NumericalError("invert_frame_styles: non-finite loss");
      if (v < best_loss) {
        best_loss = v;
        best = wt.detach().clone();
      }
      if (s == steps_per_frame) break;
      auto g = torch::autograd::grad({loss}, {wt})[0];
      opt.step(wt, g);
    }
    out.push_back(best);
    w = best;
  }
  return torch::cat(out, 0);
}

std::string model_config_hash(const ModelConfig& cfg) { return json_hash(to_json(cfg)); }

void write_motion_style(const std::string& path, const MotionStyleFile& f) {
  Json j{{"m", f.m.m},
         {"k", f.m.m.size()},
         {"config_hash", f.config_hash},
         {"loss", f.loss}};
  if (f.label) j["label"] = Json{{"actor", f.label->actor_id}, {"action", f.label->action_id}};
  write_json_file_atomic(path, j);
}

MotionStyleFile read_motion_style(const std::string& path) {
  auto j = read_json_file(path);
  require_known_keys(j, {"m", "k", "config_hash", "loss", "label"}, "m_star");
  MotionStyleFile f;
  try {
    f.m.m = j.at("m").get<std::vector<double>>();
    f.config_hash = j.at("config_hash").get<std::string>();
    f.loss = json_get_or(j, "loss", 0.0);
    if (j.at("k").get<std::size_t>() != f.m.m.size()) throw ConfigError("m_star: k does not match m");
    if (auto it = j.find("label"); it != j.end()) {
      f.label = ConditionLabel{it->at("actor").get<int>(), it->at("action").get<int>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("m_star: ") + e.what());
  }
  for (double v : f.m.m) {
    if (!std::isfinite(v)) throw ConfigError("m_star: non-finite entry");
  }
  return f;
}

}  // namespace tempostyle
