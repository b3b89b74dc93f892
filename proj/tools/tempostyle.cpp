// Command-line entry point: make-data | train | generate | invert | tune | eval | analyze | ablate
#include <CLI11.hpp>

#include <ATen/CPUGeneratorImpl.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "plot.hpp"
#include "tempostyle/analysis.hpp"
#include "tempostyle/checkpoint.hpp"
#include "tempostyle/clip_features.hpp"
#include "tempostyle/dataio.hpp"
#include "tempostyle/errors.hpp"
#include "tempostyle/inversion.hpp"
#include "tempostyle/run_manifest.hpp"
#include "tempostyle/training.hpp"

namespace fs = std::filesystem;
using namespace tempostyle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string default_run_root() {
  if (const char* env = std::getenv("TEMPOSTYLE_RUNS"); env && *env) return env;
  return "runs";
}

std::string resolve_out(const std::string& out, const std::string& command) {
  if (!out.empty()) return out;
  return (fs::path(default_run_root()) / command).string();
}

/// Manifest location for commands whose output is a single file.
std::string sidecar_manifest_dir(const std::string& out_file) {
  auto p = fs::path(out_file);
  return (p.parent_path() / (p.stem().string() + ".run")).string();
}

void finish(RunManifest& m, const std::string& dir) {
  m.status = "ok";
  m.finished_at = utc_timestamp();
  m.write(dir);
}

/// Runs a job body, marking the manifest failed if it throws.
template <typename F>
int guarded(RunManifest& m, const std::string& dir, F&& body) {
  m.write(dir);
  try {
    body();
  } catch (const std::exception& e) {
    m.status = "failed";
    m.error = e.what();
    m.finished_at = utc_timestamp();
    m.write(dir);
    throw;
  }
  finish(m, dir);
  return kExitOk;
}

int parse_label_part(const std::string& s, const std::vector<std::string>& names, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<int>(i);
  }
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    const int v = std::stoi(s);
    if (v < static_cast<int>(names.size())) return v;
  }
  throw LookupError(std::string("unknown ") + what + " '" + s + "'");
}

struct LoadedModel {
  Checkpoint ckpt;
  VideoGAN model{nullptr};
  LabelVocabulary vocab;
  double lambda = 1.0;
};

LoadedModel load_model(const std::string& path) {
  LoadedModel lm;
  lm.ckpt = load_checkpoint(path);
  lm.model = model_from_checkpoint(lm.ckpt);
  lm.model->eval();
  if (lm.ckpt.manifest.contains("vocabulary")) lm.vocab = vocabulary_from_json(lm.ckpt.manifest.at("vocabulary"));
  lm.lambda = checkpoint_lambda(lm.ckpt);
  return lm;
}

ConditionLabel resolve_label(const LoadedModel& lm, const std::string& actor, const std::string& action,
                             const std::optional<ConditionLabel>& fallback) {
  if (actor.empty() || action.empty()) {
    if (fallback && actor.empty() && action.empty()) return *fallback;
    throw ConfigError("both --actor and --action are required");
  }
  ConditionLabel l{parse_label_part(actor, lm.vocab.actors, "actor"),
                   parse_label_part(action, lm.vocab.actions, "action")};
  lm.model->fc->check_label(l);
  return l;
}

void print_progress(const IterationStats& s) {
  std::cout << "iter " << s.iter << " g_loss " << s.g_loss << " d_loss " << s.d_loss << " lambda "
            << s.lambda;
  if (s.r1) std::cout << " r1 " << *s.r1;
  std::cout << std::endl;
}

TrainConfig load_train_config(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  return train_config_from_json(read_json_file(path));
}

int run_make_data(const std::string& config, const std::string& out, std::optional<uint64_t> seed) {
  SynthSpec spec;
  if (!config.empty()) spec = synth_spec_from_json(read_json_file(config));
  if (seed) spec.seed = *seed;
  spec.validate();
  const auto root = resolve_out(out, "data");
  auto manifest = begin_run("make-data", to_json(spec), spec.seed);
  manifest.artifacts["index"] = "index.json";
  return guarded(manifest, root, [&] {
    auto index = build_dataset(spec, root);
    std::cout << "wrote " << index.clips.size() << " clips to " << root << "\n";
  });
}

int run_train_job(const std::string& command, TrainConfig cfg, const std::string& out,
                  const std::optional<std::string>& resume, const Json& extra) {
  cfg.validate();
  const auto dir = resolve_out(out, command);
  Json mcfg = to_json(cfg);
  for (const auto& [k, v] : extra.items()) mcfg[k] = v;
  auto manifest = begin_run(command, mcfg, cfg.seed);
  manifest.artifacts["metrics"] = "metrics.ndjson";
  manifest.artifacts["final_checkpoint"] = "final.ckpt";
  return guarded(manifest, dir, [&] {
    TrainRunOptions opts;
    opts.out_dir = dir;
    opts.resume = resume;
    int64_t last_print = -1;
    opts.on_log = [&](const IterationStats& s) {
      if (s.iter / 100 != last_print) {
        last_print = s.iter / 100;
        print_progress(s);
      }
    };
    run_training(cfg, opts);
  });
}

struct GenerateArgs {
  std::string ckpt, actor, action, out, m_star;
  int64_t frames = 64;
  double fps = 1.0;
  double t0 = 0.0;
  uint64_t seed = 0;
};

int run_generate(const GenerateArgs& a) {
  if (a.frames < 1) throw ConfigError("--frames must be positive");
  if (!(a.fps > 0)) throw ConfigError("--fps must be positive");
  auto lm = load_model(a.ckpt);
  const auto& mc = lm.model->config();
  const auto dir = resolve_out(a.out, "generate");
  Json cfg{{"ckpt", a.ckpt}, {"actor", a.actor}, {"action", a.action}, {"frames", a.frames},
           {"fps", a.fps}, {"t0", a.t0}, {"m_star", a.m_star}};
  auto manifest = begin_run("generate", cfg, a.seed);
  manifest.artifacts["clip"] = ".";
  return guarded(manifest, dir, [&] {
    std::vector<double> times;
    for (int64_t i = 0; i < a.frames; ++i) times.push_back(a.t0 + static_cast<double>(i) / a.fps);
    VideoClip clip;
    torch::Tensor m;
    std::optional<ConditionLabel> m_star_label;
    if (!a.m_star.empty()) {
      auto f = read_motion_style(a.m_star);
      if (f.config_hash != model_config_hash(mc)) throw ConfigError("m_star was inverted with a different model");
      m = torch::tensor(f.m.m, torch::kFloat64).to(torch::kFloat32).reshape({1, -1});
      m_star_label = f.label;
    } else {
      auto z = seeded_motion_noise(mc.z_dim, a.seed);
      torch::NoGradGuard guard;
      m = lm.model->mapper->forward(torch::tensor(z.z, torch::kFloat64).to(torch::kFloat32).unsqueeze(0));
    }
    torch::Tensor w_c;
    std::optional<ConditionLabel> label;
    {
      torch::NoGradGuard guard;
      if (mc.conditional) {
        label = resolve_label(lm, a.actor, a.action, m_star_label);
        auto ids = [](int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); };
        w_c = lm.model->content(ids(label->actor_id), ids(label->action_id), lm.lambda);
      } else {
        auto gen = at::make_generator<at::CPUGeneratorImpl>(a.seed ^ 0x9e3779b97f4a7c15ull);
        w_c = lm.model->content({}, {}, 1.0, torch::randn({1, 2 * mc.embed_dim}, gen));
      }
    }
    clip = lm.model->render_clip(w_c, m, times);
    clip.label = label;
    write_clip(clip, dir);
    std::cout << "wrote " << clip.length() << " frames to " << dir << "\n";
  });
}

struct InvertArgs {
  std::string ckpt, frames, actor, action, out;
  InversionConfig cfg;
};

int run_invert(InvertArgs a) {
  auto lm = load_model(a.ckpt);
  auto clip = load_frames_dir(a.frames);
  const auto label = resolve_label(lm, a.actor, a.action, clip.label);
  a.cfg.lambda = lm.lambda;
  a.cfg.validate();
  const auto out = a.out.empty() ? (fs::path(resolve_out("", "invert")) / "m_star.json").string() : a.out;
  const auto run_dir = sidecar_manifest_dir(out);
  Json cfg{{"ckpt", a.ckpt}, {"frames", a.frames}, {"actor", label.actor_id}, {"action", label.action_id},
           {"steps", a.cfg.steps}, {"lr", a.cfg.lr}, {"max_frames", a.cfg.max_frames},
           {"restarts", a.cfg.restarts}, {"w_perceptual", a.cfg.weights.perceptual},
           {"w_mse", a.cfg.weights.mse}};
  auto manifest = begin_run("invert", cfg, a.cfg.seed);
  manifest.artifacts["m_star"] = fs::relative(fs::absolute(out), fs::absolute(run_dir)).string();
  manifest.artifacts["trace"] = "trace.csv";
  return guarded(manifest, run_dir, [&] {
    PerceptualDistance dist(nullptr, a.cfg.weights);
    auto r = invert_motion(lm.model, clip, label, a.cfg, dist);
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_motion_style(out, MotionStyleFile{r.m_star, model_config_hash(lm.model->config()), label, r.best_loss});
    std::ofstream trace(fs::path(run_dir) / "trace.csv");
    trace << "step,loss\n" << std::setprecision(10);
    for (std::size_t i = 0; i < r.trace.size(); ++i) trace << i << ',' << r.trace[i] << '\n';
    std::cout << "loss " << r.initial_loss << " -> " << r.best_loss << " (start " << r.chosen_start
              << ", step " << r.best_step << "); wrote " << out << "\n";
  });
}

struct TuneArgs {
  std::string ckpt, m_star, frames, actor, action, out;
  TuneConfig cfg;
};

int run_tune(TuneArgs a) {
  auto lm = load_model(a.ckpt);
  auto ms = read_motion_style(a.m_star);
  if (ms.config_hash != model_config_hash(lm.model->config())) {
    throw ConfigError("m_star was inverted with a different model");
  }
  auto clip = load_frames_dir(a.frames);
  const auto label = resolve_label(lm, a.actor, a.action, ms.label ? ms.label : clip.label);
  a.cfg.lambda = lm.lambda;
  a.cfg.validate();
  const auto out = a.out.empty() ? (fs::path(resolve_out("", "tune")) / "tuned.ckpt").string() : a.out;
  const auto run_dir = sidecar_manifest_dir(out);
  Json cfg{{"ckpt", a.ckpt}, {"m_star", a.m_star}, {"frames", a.frames}, {"actor", label.actor_id},
           {"action", label.action_id}, {"steps", a.cfg.steps}, {"lr", a.cfg.lr},
           {"max_frames", a.cfg.max_frames}};
  auto manifest = begin_run("tune", cfg, 0);
  manifest.artifacts["checkpoint"] = fs::relative(fs::absolute(out), fs::absolute(run_dir)).string();
  return guarded(manifest, run_dir, [&] {
    PerceptualDistance dist(nullptr, a.cfg.weights);
    auto r = pivotal_tune(lm.model, ms.m, clip, label, a.cfg, dist);
    Checkpoint ck;
    ck.manifest = lm.ckpt.manifest;
    ck.manifest["kind"] = "tempostyle-tuned";
    ck.manifest["pivotal_tuning"] = Json{{"steps", a.cfg.steps},       {"lr", a.cfg.lr},
                                         {"mse_before", r.mse_before}, {"mse_after", r.mse_after},
                                         {"loss_before", r.loss_before}, {"loss_after", r.loss_after},
                                         {"diverged", r.diverged}};
    ck.manifest["lambda"] = lm.lambda;
    add_model_tensors(ck, *r.model);
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    save_checkpoint(out, ck);
    std::cout << "mse " << r.mse_before << " -> " << r.mse_after << (r.diverged ? " (diverged, weights kept)" : "")
              << "; wrote " << out << "\n";
  });
}

struct EvalArgs {
  std::string real, fake, ckpt, out;
  std::string extractor = "randconv";
};

int run_eval(const EvalArgs& a) {
  const auto out = a.out.empty() ? (fs::path(resolve_out("", "eval")) / "report.json").string() : a.out;
  const auto run_dir = sidecar_manifest_dir(out);
  Json cfg{{"real", a.real}, {"fake", a.fake}, {"ckpt", a.ckpt}, {"extractor", a.extractor}};
  auto manifest = begin_run("eval", cfg, 0);
  manifest.artifacts["report"] = fs::relative(fs::absolute(out), fs::absolute(run_dir)).string();
  std::unique_ptr<ClipFeatureExtractor> ex;
  if (a.extractor == "randconv") {
    ex = std::make_unique<RandomConvClipExtractor>();
  } else if (a.extractor == "dt") {
    if (a.ckpt.empty()) throw ConfigError("--extractor dt needs --ckpt");
    auto lm = load_model(a.ckpt);
    ex = std::make_unique<TimeDiscriminatorClipExtractor>(lm.model, fs::path(a.ckpt).filename().string());
  } else {
    throw ConfigError("unknown extractor '" + a.extractor + "'");
  }
  return guarded(manifest, run_dir, [&] {
    auto real = load_clip_tree(a.real);
    auto fake = load_clip_tree(a.fake);
    Json report{{"n_clips", fake.size()}, {"n_real_clips", real.size()}, {"extractor_id", ex->id()}};
    for (int64_t n : {16, 64}) {
      auto enough = [n](const std::vector<VideoClip>& cs) {
        std::vector<VideoClip> o;
        for (const auto& c : cs) {
          if (c.length() >= n) o.push_back(c);
        }
        return o;
      };
      auto r = enough(real), f = enough(fake);
      const std::string key = "frechet_" + std::to_string(n);
      if (r.size() < 2 || f.size() < 2) {
        report[key] = nullptr;
        continue;
      }
      report[key] = frechet_distance(ex->feature_set(r, n), ex->feature_set(f, n));
    }
    CoverageContourLandmarks provider;
    std::vector<MotionSignal> signals;
    for (const auto& c : fake) signals.push_back(motion_signal(c, provider));
    auto pc = mean_pairwise_correlation(signals);
    report["r_bar_t"] = std::isnan(pc.mean) ? Json(nullptr) : Json(pc.mean);
    report["r_bar_t_pairs"] = pc.n_pairs;
    report["r_bar_t_undefined_pairs"] = pc.n_undefined;
    report["landmark_provider"] = provider.id();
    if (pc.n_undefined > 0) std::cerr << "warning: " << pc.n_undefined << " constant-signal pairs skipped\n";
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_json_file_atomic(out, report);
    std::cout << report.dump(2) << "\n";
  });
}

struct AnalyzeArgs {
  std::string ckpt, frames, actor, action, out;
  std::string mode = "inverted";
  int64_t n_frames = 64;
  int64_t steps_per_frame = 100;
  double lr = 2e-2;
  uint64_t seed = 0;
  int components = 5;
};

int run_analyze(const AnalyzeArgs& a) {
  if (a.mode != "inverted" && a.mode != "direct") throw ConfigError("--mode must be inverted or direct");
  if (a.components < 1) throw ConfigError("--components must be positive");
  auto lm = load_model(a.ckpt);
  const auto& mc = lm.model->config();
  const auto dir = resolve_out(a.out, "analyze");
  Json cfg{{"ckpt", a.ckpt}, {"frames", a.frames}, {"mode", a.mode}, {"n_frames", a.n_frames},
           {"steps_per_frame", a.steps_per_frame}, {"lr", a.lr}, {"components", a.components}};
  auto manifest = begin_run("analyze", cfg, a.seed);
  manifest.artifacts["projections"] = "pca_projections.csv";
  manifest.artifacts["cosine_content"] = "cosine_content.csv";
  manifest.artifacts["plot"] = "pca_projections.png";
  return guarded(manifest, dir, [&] {
    VideoClip clip;
    ConditionLabel label;
    torch::Tensor m;
    if (!a.frames.empty()) {
      clip = load_frames_dir(a.frames);
      label = resolve_label(lm, a.actor, a.action, clip.label);
    } else {
      label = resolve_label(lm, a.actor, a.action, std::nullopt);
      std::vector<double> times;
      for (int64_t i = 0; i < a.n_frames; ++i) times.push_back(static_cast<double>(i));
      auto z = seeded_motion_noise(mc.z_dim, a.seed);
      torch::NoGradGuard guard;
      m = lm.model->mapper->forward(torch::tensor(z.z, torch::kFloat64).to(torch::kFloat32).unsqueeze(0));
      clip = lm.model->generate_video(z, label, times, lm.lambda);
    }
    torch::Tensor traj;
    if (a.mode == "inverted") {
      PerceptualDistance dist;
      traj = invert_frame_styles(lm.model, clip, label, a.steps_per_frame, a.lr, dist, lm.lambda);
    } else {
      if (!m.defined()) throw ConfigError("--mode direct needs a generated clip (omit --frames)");
      torch::NoGradGuard guard;
      auto times = torch::tensor(clip.timepoints, torch::kFloat64).to(torch::kFloat32).unsqueeze(0);
      traj = temporal_styles(m, lm.model->t2v->forward(times)).squeeze(0);
    }
    auto t64 = traj.to(torch::kFloat64).contiguous();
    Eigen::MatrixXd lat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        t64.data_ptr<double>(), t64.size(0), t64.size(1));
    auto pca = pca_trajectory(lat);
    const int nc = std::min<int>(a.components, static_cast<int>(pca.projections.cols()));
    std::ofstream proj(fs::path(dir) / "pca_projections.csv");
    proj << "t";
    for (int i = 0; i < nc; ++i) proj << ",p" << (i + 1);
    proj << '\n' << std::setprecision(10);
    for (Eigen::Index r = 0; r < pca.projections.rows(); ++r) {
      proj << clip.timepoints[static_cast<std::size_t>(r)];
      for (int i = 0; i < nc; ++i) proj << ',' << pca.projections(r, i);
      proj << '\n';
    }
    std::ofstream cc(fs::path(dir) / "cosine_content.csv");
    cc << "component,explained_ratio,cosine_content\n" << std::setprecision(10);
    std::vector<std::vector<double>> series;
    for (int i = 0; i < nc; ++i) {
      std::vector<double> p(pca.projections.rows());
      for (Eigen::Index r = 0; r < pca.projections.rows(); ++r) p[r] = pca.projections(r, i);
      double c = std::numeric_limits<double>::quiet_NaN();
      if (pca.explained_variance[i] > 0) c = cosine_content(p, i + 1);
      cc << (i + 1) << ',' << pca.explained_ratio[i] << ',' << c << '\n';
      std::cout << "component " << (i + 1) << ": explained " << pca.explained_ratio[i] << ", cosine content " << c << "\n";
      if (i < 3) series.push_back(std::move(p));
    }
    plot::Canvas canvas(512, 256);
    canvas.series(series);
    canvas.save((fs::path(dir) / "pca_projections.png").string());
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tempostyle: motion/content style video GAN toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  auto* mk = app.add_subcommand("make-data", "Render the synthetic shapes corpus");
  std::string mk_config, mk_out;
  std::optional<uint64_t> mk_seed;
  mk->add_option("--config", mk_config, "Corpus spec JSON");
  mk->add_option("--out", mk_out, "Corpus root directory (default $TEMPOSTYLE_RUNS/data)");
  mk->add_option("--seed", mk_seed, "Random seed");

  auto* tr = app.add_subcommand("train", "Train a model");
  std::string tr_config, tr_out, tr_resume, tr_data;
  std::optional<uint64_t> tr_seed;
  std::optional<int64_t> tr_iters;
  tr->add_option("--config", tr_config, "Training config JSON");
  tr->add_option("--out", tr_out, "Run directory (default $TEMPOSTYLE_RUNS/train)");
  tr->add_option("--resume", tr_resume, "Checkpoint to continue from");
  tr->add_option("--data", tr_data, "Corpus root (overrides the config)");
  tr->add_option("--seed", tr_seed, "Random seed (overrides the config)");
  tr->add_option("--iters", tr_iters, "Total iterations (overrides the config)");

  auto* ab = app.add_subcommand("ablate", "Train an ablation variant");
  std::string ab_config, ab_out, ab_variant, ab_data;
  std::optional<uint64_t> ab_seed;
  std::optional<int64_t> ab_iters;
  ab->add_option("--variant", ab_variant, "full | dt1 | no-dt | no-ds | no-ramp | unconditional | k<N>")->required();
  ab->add_option("--config", ab_config, "Base training config JSON");
  ab->add_option("--out", ab_out, "Run directory (default $TEMPOSTYLE_RUNS/ablate)");
  ab->add_option("--data", ab_data, "Corpus root (overrides the config)");
  ab->add_option("--seed", ab_seed, "Random seed (overrides the config)");
  ab->add_option("--iters", ab_iters, "Total iterations (overrides the config)");

  auto* gn = app.add_subcommand("generate", "Render a clip from a checkpoint");
  GenerateArgs ga;
  gn->add_option("--ckpt", ga.ckpt, "Checkpoint")->required();
  gn->add_option("--actor", ga.actor, "Actor name or id");
  gn->add_option("--action", ga.action, "Action name or id");
  gn->add_option("--frames", ga.frames, "Number of frames");
  gn->add_option("--fps", ga.fps, "Frames per unit of training time (fractional time-points when > 1)");
  gn->add_option("--t0", ga.t0, "First time-point");
  gn->add_option("--seed", ga.seed, "Seed of the motion noise z_m");
  gn->add_option("--m-star", ga.m_star, "Use an inverted motion style instead of z_m");
  gn->add_option("--out", ga.out, "Output clip directory (default $TEMPOSTYLE_RUNS/generate)");

  auto* iv = app.add_subcommand("invert", "Recover the motion style of a clip");
  InvertArgs ia;
  iv->add_option("--ckpt", ia.ckpt, "Checkpoint")->required();
  iv->add_option("--frames", ia.frames, "Clip directory (frame_%05d.png [+ meta.json])")->required();
  iv->add_option("--actor", ia.actor, "Actor name or id (default: from meta.json)");
  iv->add_option("--action", ia.action, "Action name or id (default: from meta.json)");
  iv->add_option("--out", ia.out, "Output m_star.json");
  iv->add_option("--steps", ia.cfg.steps, "Optimization steps");
  iv->add_option("--lr", ia.cfg.lr, "Learning rate");
  iv->add_option("--max-frames", ia.cfg.max_frames, "Frames fitted (1..120)");
  iv->add_option("--restarts", ia.cfg.restarts, "Random restarts besides the zero start");
  iv->add_option("--restart-steps", ia.cfg.restart_steps, "Steps each start runs before the best is kept");
  iv->add_option("--w-perceptual", ia.cfg.weights.perceptual, "Weight of the feature distance");
  iv->add_option("--w-mse", ia.cfg.weights.mse, "Weight of the pixel mse");
  iv->add_option("--seed", ia.cfg.seed, "Seed of the random restarts");

  auto* tu = app.add_subcommand("tune", "Pivotal tuning of the synthesis network");
  TuneArgs ta;
  tu->add_option("--ckpt", ta.ckpt, "Checkpoint")->required();
  tu->add_option("--m-star", ta.m_star, "m_star.json from invert")->required();
  tu->add_option("--frames", ta.frames, "Target clip directory")->required();
  tu->add_option("--actor", ta.actor, "Actor name or id (default: from m_star.json)");
  tu->add_option("--action", ta.action, "Action name or id (default: from m_star.json)");
  tu->add_option("--out", ta.out, "Output checkpoint");
  tu->add_option("--steps", ta.cfg.steps, "Tuning steps");
  tu->add_option("--lr", ta.cfg.lr, "Learning rate");
  tu->add_option("--max-frames", ta.cfg.max_frames, "Frames fitted (1..120)");

  auto* ev = app.add_subcommand("eval", "Fréchet distance and motion correlation report");
  EvalArgs ea;
  ev->add_option("--real", ea.real, "Directory tree of real clips")->required();
  ev->add_option("--fake", ea.fake, "Directory tree of generated clips")->required();
  ev->add_option("--extractor", ea.extractor, "randconv | dt");
  ev->add_option("--ckpt", ea.ckpt, "Checkpoint providing D_t for --extractor dt");
  ev->add_option("--out", ea.out, "Output report JSON");

  auto* an = app.add_subcommand("analyze", "PCA and cosine content of a style trajectory");
  AnalyzeArgs aa;
  an->add_option("--ckpt", aa.ckpt, "Checkpoint")->required();
  an->add_option("--frames", aa.frames, "Clip directory to analyze (default: generate one)");
  an->add_option("--actor", aa.actor, "Actor name or id");
  an->add_option("--action", aa.action, "Action name or id");
  an->add_option("--mode", aa.mode, "inverted (per-frame inversion) | direct (model styles)");
  an->add_option("--n-frames", aa.n_frames, "Length of the generated clip");
  an->add_option("--steps-per-frame", aa.steps_per_frame, "Inversion steps per frame");
  an->add_option("--lr", aa.lr, "Per-frame inversion learning rate");
  an->add_option("--components", aa.components, "Principal components reported");
  an->add_option("--seed", aa.seed, "Seed of the generated clip's motion noise");
  an->add_option("--out", aa.out, "Output directory (default $TEMPOSTYLE_RUNS/analyze)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help / --version
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*mk) return run_make_data(mk_config, mk_out, mk_seed);
    if (*tr) {
      auto cfg = load_train_config(tr_config);
      if (!tr_data.empty()) cfg.dataset = tr_data;
      if (tr_seed) cfg.seed = *tr_seed;
      if (tr_iters) cfg.total_iters = *tr_iters;
      std::optional<std::string> resume;
      if (!tr_resume.empty()) resume = tr_resume;
      return run_train_job("train", cfg, tr_out, resume, Json::object());
    }
    if (*ab) {
      auto cfg = load_train_config(ab_config);
      if (!ab_data.empty()) cfg.dataset = ab_data;
      if (ab_seed) cfg.seed = *ab_seed;
      if (ab_iters) cfg.total_iters = *ab_iters;
      apply_variant(cfg, ab_variant);
      return run_train_job("ablate", cfg, ab_out, std::nullopt, Json{{"variant", ab_variant}});
    }
    if (*gn) return run_generate(ga);
    if (*iv) return run_invert(ia);
    if (*tu) return run_tune(ta);
    if (*ev) return run_eval(ea);
    if (*an) return run_analyze(aa);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
