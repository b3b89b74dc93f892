// Acceptance checks. Trains the desk-scale runs on first use (or reuses them from
// --runs) and prints one PASS/FAIL line per criterion.

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "tempostyle/analysis.hpp"
#include "tempostyle/checkpoint.hpp"
#include "tempostyle/clip_features.hpp"
#include "tempostyle/dataio.hpp"
#include "tempostyle/inversion.hpp"
#include "tempostyle/oracle.hpp"
#include "tempostyle/training.hpp"

using namespace tempostyle;
namespace fs = std::filesystem;

namespace {

constexpr int64_t kMainIters = 20000;
constexpr int64_t kAblationIters = 8000;
constexpr double kCpuBudgetSeconds = 8 * 3600.0;

struct Outcome {
  int id;
  bool pass;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

class Acceptance {
 public:
  Acceptance(fs::path runs, std::string cli, std::string unit_tests)
      : runs_(std::move(runs)), cli_(std::move(cli)), unit_tests_(std::move(unit_tests)) {}

  void prepare() {
    ensure_corpus();
    auto base = TrainConfig{};
    base.dataset = (runs_ / "data").string();
    base.seed = 0;
    base.total_iters = kMainIters;
    base.checkpoint_every = 1000;
    base.log_every = 100;
    ensure_run("main", base, "full");
    for (const char* v : {"k8", "k16", "dt1", "no-dt"}) {
      auto cfg = base;
      cfg.total_iters = kAblationIters;
      apply_variant(cfg, v);
      ensure_run(v, cfg, v);
    }
    index_ = load_index((runs_ / "data").string());
    train_ = load_split((runs_ / "data").string(), "train");
    test_ = load_split((runs_ / "data").string(), "test");
    oracle_.fit(train_, index_.spec.n_actors, index_.spec.n_actions);
  }

  std::vector<Outcome> run_all() {
    std::vector<Outcome> out;
    out.push_back(criterion_1());
    out.push_back(criterion_2());
    out.push_back(criterion_3());
    out.push_back(criterion_4());
    out.push_back(criterion_5());
    auto [c6, c7] = criteria_6_7();
    out.push_back(c6);
    out.push_back(c7);
    out.push_back(criterion_8());
    out.push_back(criterion_9());
    return out;
  }

 private:
  // ---- runs -------------------------------------------------------------------------

  void ensure_corpus() {
    const auto root = runs_ / "data";
    if (fs::exists(root / "index.json")) return;
    std::cerr << "[acceptance] rendering corpus into " << root << "\n";
    build_dataset(SynthSpec{}, root.string());
  }

  static std::optional<fs::path> latest_checkpoint(const fs::path& dir) {
    std::optional<fs::path> best;
    if (!fs::exists(dir)) return best;
    const std::regex re("ckpt_(\\d{6})\\.ckpt");
    int64_t best_it = -1;
    for (const auto& e : fs::directory_iterator(dir)) {
      std::smatch m;
      const auto name = e.path().filename().string();
      if (std::regex_match(name, m, re) && std::stoll(m[1]) > best_it) {
        best_it = std::stoll(m[1]);
        best = e.path();
      }
    }
    return best;
  }

  void ensure_run(const std::string& name, const TrainConfig& cfg, const std::string& variant) {
    const auto dir = runs_ / name;
    if (fs::exists(dir / "final.ckpt")) return;
    fs::create_directories(runs_ / "configs");
    const auto cfg_path = runs_ / "configs" / (name + ".json");
    write_json_file_atomic(cfg_path.string(), to_json(cfg));
    std::string cmd = cli_ + " train --config " + cfg_path.string() + " --out " + dir.string();
    if (auto last = latest_checkpoint(dir)) cmd += " --resume " + last->string();
    std::cerr << "[acceptance] training " << name << " (" << variant << "): " << cmd << "\n";
    if (std::system(cmd.c_str()) != 0) throw std::runtime_error("training run '" + name + "' failed");
  }

  VideoGAN load(const std::string& run, const std::string& file, double* lambda = nullptr) {
    auto ck = load_checkpoint((runs_ / run / file).string());
    if (lambda) *lambda = checkpoint_lambda(ck);
    auto m = model_from_checkpoint(ck);
    m->eval();
    return m;
  }

  static std::string ckpt_at(int64_t iter) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_%06lld.ckpt", static_cast<long long>(iter));
    return buf;
  }

  // The main run's checkpoint with as many iterations as the ablation runs.
  std::string main_at_ablation() const { return ckpt_at(kAblationIters); }

  static std::vector<double> frame_times(int64_t n) {
    std::vector<double> t;
    for (int64_t i = 0; i < n; ++i) t.push_back(static_cast<double>(i));
    return t;
  }

  static torch::Tensor ids(int v) { return torch::tensor({static_cast<int64_t>(v)}, torch::kInt64); }

  static torch::Tensor mapped_m(VideoGAN& model, uint64_t seed) {
    torch::NoGradGuard guard;
    auto m = model->mapper->map(seeded_motion_noise(model->config().z_dim, seed));
    return torch::tensor(m.m, torch::kFloat64).to(torch::kFloat32).unsqueeze(0);
  }

  // Clips for every label in `cells`, `per_cell` each, motion noise seeded per clip.
  static std::vector<VideoClip> generate_cells(VideoGAN& model, double lambda,
                                               const std::vector<std::pair<int, int>>& cells, int per_cell,
                                               int64_t frames, uint64_t seed_base) {
    std::vector<VideoClip> out;
    uint64_t seed = seed_base;
    for (auto [a, b] : cells) {
      for (int i = 0; i < per_cell; ++i) {
        out.push_back(model->generate_video(seeded_motion_noise(model->config().z_dim, seed++), {a, b},
                                            frame_times(frames), lambda));
      }
    }
    return out;
  }

  static std::vector<double> area_series(const VideoClip& clip) {
    return motion_signal(clip, CoverageContourLandmarks()).values;
  }

  static double corr_or_zero(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = std::min(a.size(), b.size());
    auto r = pearson(std::span(a.data(), n), std::span(b.data(), n));
    return r ? *r : 0.0;
  }

  static VideoClip head(const VideoClip& clip, int64_t n) {
    n = std::min(n, clip.length());
    VideoClip out;
    out.frames = clip.frames.slice(0, 0, n);
    out.timepoints.assign(clip.timepoints.begin(), clip.timepoints.begin() + n);
    out.label = clip.label;
    if (!clip.landmarks.empty()) out.landmarks.assign(clip.landmarks.begin(), clip.landmarks.begin() + n);
    return out;
  }

  // ---- criteria ---------------------------------------------------------------------

  Outcome criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system((unit_tests_ + " --minimal > " + (runs_ / "unit_tests.log").string() + " 2>&1").c_str());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = rc == 0 && secs < 120.0;
    return {1, pass, "unit suite exit " + std::to_string(rc) + ", " + fmt(secs, 3) + " s (limit 120 s)"};
  }

  Outcome criterion_2() {
    double worst = 0.0;
    int checked = 0;
    const std::vector<std::pair<std::string, std::string>> ckpts{
        {"main", "final.ckpt"}, {"k8", "final.ckpt"}, {"k16", "final.ckpt"}, {"dt1", "final.ckpt"}, {"no-dt", "final.ckpt"}};
    for (const auto& [run, file] : ckpts) {
      double lambda = 1.0;
      auto model = load(run, file, &lambda);
      for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 0}, {2, 3}, {3, 0}}) {
        torch::NoGradGuard guard;
        auto w_c = model->content(ids(a), ids(b), lambda);
        auto clip = model->render_clip(w_c, torch::zeros({1, model->config().k}), frame_times(64));
        worst = std::max(worst, (clip.frames - clip.frames[0].unsqueeze(0)).abs().max().item<double>());
        ++checked;
      }
    }
    return {2, worst <= 1e-6,
            "max |frame_t - frame_0| = " + fmt(worst) + " over " + std::to_string(checked) + " clips x 64 frames (limit 1e-6)"};
  }

  Outcome criterion_3() {
    auto ck = load_checkpoint((runs_ / "main" / "final.ckpt").string());
    const auto iters = ck.manifest.at("iteration").get<int64_t>();
    const double secs = json_get_or(ck.manifest, "train_seconds", NAN);
    auto cfg = train_config_from_json(ck.manifest.at("train"));
    std::ifstream in(runs_ / "main" / "metrics.ndjson");
    std::string line;
    int64_t rows = 0, bad = 0;
    while (std::getline(in, line)) {
      auto j = Json::parse(line);
      ++rows;
      for (const char* key : {"g_loss", "d_loss", "r1"}) {
        if (j.at(key).is_null()) continue;
        if (!std::isfinite(j.at(key).get<double>())) ++bad;
      }
    }
    const bool shape_ok = cfg.model.resolution == 32 && cfg.model.k == 32 && cfg.seed == 0 &&
                          index_.spec.n_actors == 4 && index_.spec.n_actions == 4;
    const bool pass = iters == kMainIters && std::isfinite(secs) && secs <= kCpuBudgetSeconds && bad == 0 &&
                      rows > 0 && shape_ok;
    return {3, pass,
            std::to_string(iters) + " iterations in " + fmt(secs / 60.0, 4) + " min CPU (limit 480), " +
                std::to_string(rows) + " logged rows, " + std::to_string(bad) + " non-finite"};
  }

  Outcome criterion_4() {
    double lambda = 1.0;
    auto model = load("main", "final.ckpt", &lambda);
    // Motion source: a real pulsating clip the model never saw, inverted.
    const int pulsate = static_cast<int>(SynthAction::Pulsate);
    const VideoClip* source = nullptr;
    for (const auto& c : test_) {
      if (c.label && c.label->action_id == pulsate) {
        source = &c;
        break;
      }
    }
    if (!source) return {4, false, "no held-out pulsate clip in the corpus"};
    InversionConfig icfg;
    icfg.lambda = lambda;
    icfg.seed = 4;
    auto inv = invert_motion(model, *source, *source->label, icfg, dist_);
    auto m = torch::tensor(inv.m_star.m, torch::kFloat64).to(torch::kFloat32).reshape({1, -1});

    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> actor(0, index_.spec.n_actors - 1);
    std::uniform_real_distribution<double> alpha(0.0, 1.0);
    std::vector<MotionSignal> signals;
    int64_t interpolated = 0;
    for (int i = 0; i < 100; ++i) {
      torch::NoGradGuard guard;
      const int a1 = actor(rng), a2 = actor(rng);
      auto w_c = model->fc->from_embeddings(model->fc->interpolate_actor(a1, a2, alpha(rng)).unsqueeze(0),
                                            model->fc->action_table[pulsate].unsqueeze(0), lambda);
      auto clip = model->render_clip(w_c, m, frame_times(64));
      signals.push_back(motion_signal(clip, CoverageContourLandmarks()));
      if (signals.back().any_interpolated()) ++interpolated;
    }
    auto r = mean_pairwise_correlation(signals);
    const bool pass = std::isfinite(r.mean) && r.mean >= 0.7;
    return {4, pass,
            "r_bar_t = " + fmt(r.mean) + " over " + std::to_string(r.n_pairs) + " pairs (" +
                std::to_string(r.n_undefined) + " undefined, " + std::to_string(interpolated) +
                " clips with interpolated frames), limit >= 0.7"};
  }

  Outcome criterion_5() {
    double lambda = 1.0;
    auto model = load("main", "final.ckpt", &lambda);
    const double real_acc = oracle_.action_accuracy(test_);
    auto gen = generate_cells(model, lambda, index_.spec.holdout, 25, 64, 5000);
    const double acc = oracle_.action_accuracy(gen);
    return {5, acc >= 0.6 && real_acc >= 0.95,
            "held-out action accuracy " + fmt(acc) + " on " + std::to_string(gen.size()) +
                " clips (limit >= 0.6); oracle real-test accuracy " + fmt(real_acc) + " (expected >= 0.95)"};
  }

  // Inverts the first 32 frames of `clip` and returns the area-signal correlation of the
  // re-rendered motion with the original, plus the inversion for reuse.
  std::pair<double, InversionResult> recovered_correlation(VideoGAN& model, double lambda, const VideoClip& clip,
                                                           uint64_t seed) {
    auto target = head(clip, 32);
    InversionConfig icfg;
    icfg.lambda = lambda;
    icfg.seed = seed;
    auto inv = invert_motion(model, target, *target.label, icfg, dist_);
    auto rec = transfer_motion(model, inv.m_star, *target.label, target.timepoints, lambda);
    return {corr_or_zero(area_series(target), area_series(rec)), inv};
  }

  std::pair<Outcome, Outcome> criteria_6_7() {
    constexpr int kSeeds = 5;
    // Self-inversion on the main model.
    double lambda = 1.0;
    auto main_final = load("main", "final.ckpt", &lambda);
    double self_corr = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      const ConditionLabel label{s % 4, (s + 1) % 4};
      VideoClip clip;
      {
        torch::NoGradGuard guard;
        auto w_c = main_final->content(ids(label.actor_id), ids(label.action_id), lambda);
        clip = main_final->render_clip(w_c, mapped_m(main_final, 600 + s), frame_times(32));
        clip.label = label;
      }
      self_corr += recovered_correlation(main_final, lambda, clip, s).first / kSeeds;
    }

    // Held-out real motions, one clip per seed, for each k at equal training length.
    auto pick = [&](int s) -> const VideoClip& { return test_[static_cast<std::size_t>((s * 7) % test_.size())]; };
    std::vector<std::pair<int, std::pair<std::string, std::string>>> ks{
        {8, {"k8", "final.ckpt"}}, {16, {"k16", "final.ckpt"}}, {32, {"main", main_at_ablation()}}};
    std::vector<double> means;
    std::string per_k;
    for (const auto& [k, where] : ks) {
      double lam = 1.0;
      auto model = load(where.first, where.second, &lam);
      double mean = 0.0;
      for (int s = 0; s < kSeeds; ++s) mean += recovered_correlation(model, lam, pick(s), s).first / kSeeds;
      means.push_back(mean);
      per_k += "k" + std::to_string(k) + "=" + fmt(mean, 3) + " ";
    }
    // The fully trained k = 32 model; its inversions seed the tuning cases.
    std::vector<std::pair<const VideoClip*, InversionResult>> cases;
    double final_mean = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      auto [r, inv] = recovered_correlation(main_final, lambda, pick(s), s);
      final_mean += r / kSeeds;
      cases.emplace_back(&pick(s), inv);
    }
    const bool monotone = means[0] <= means[1] && means[1] <= means[2];
    const bool pass6 = self_corr >= 0.95 && monotone && final_mean >= 0.8;
    Outcome c6{6, pass6,
               "self-inversion r = " + fmt(self_corr) + " (>= 0.95); held-out at " + std::to_string(kAblationIters) +
                   " iters: " + per_k + (monotone ? "(non-decreasing)" : "(NOT monotone)") +
                   "; k32 final r = " + fmt(final_mean) + " (>= 0.8)"};

    // Pivotal tuning on 10 held-out clips.
    for (int s = kSeeds; s < 10; ++s) {
      const auto& clip = test_[static_cast<std::size_t>((s * 7 + 3) % test_.size())];
      InversionConfig icfg;
      icfg.lambda = lambda;
      icfg.seed = s;
      cases.emplace_back(&clip, invert_motion(main_final, head(clip, 32), *clip.label, icfg, dist_));
    }
    int improved = 0;
    std::string reductions;
    for (const auto& [clip, inv] : cases) {
      TuneConfig tcfg;
      tcfg.lambda = lambda;
      auto res = pivotal_tune(main_final, inv.m_star, head(*clip, 32), *clip->label, tcfg, dist_);
      const double red = res.mse_before > 0 ? (res.mse_before - res.mse_after) / res.mse_before : 0.0;
      if (red >= 0.2) ++improved;
      reductions += fmt(100 * red, 3) + "% ";
    }
    Outcome c7{7, improved >= 8,
               std::to_string(improved) + "/10 cases with >= 20% mse reduction (need 8): " + reductions};
    return {c6, c7};
  }

  Outcome criterion_8() {
    RandomConvClipExtractor extractor;
    std::vector<VideoClip> real16;
    for (const auto& c : train_) real16.push_back(head(c, 16));
    auto real_fs = extractor.feature_set(real16, 16);

    std::vector<std::pair<int, int>> train_cells;
    for (int a = 0; a < index_.spec.n_actors; ++a)
      for (int b = 0; b < index_.spec.n_actions; ++b)
        if (!index_.spec.is_holdout(a, b)) train_cells.emplace_back(a, b);
    const int per_cell = static_cast<int>(train_.size() / train_cells.size());

    auto frechet_of = [&](const std::string& run, const std::string& file) {
      double lam = 1.0;
      auto model = load(run, file, &lam);
      auto gen = generate_cells(model, lam, train_cells, per_cell, 16, 9000);
      return frechet_distance(real_fs, extractor.feature_set(gen, 16));
    };
    auto accuracy_of = [&](const std::string& run, const std::string& file) {
      double lam = 1.0;
      auto model = load(run, file, &lam);
      return oracle_.action_accuracy(generate_cells(model, lam, index_.spec.holdout, 25, 64, 5000));
    };
    const double fd_full = frechet_of("main", main_at_ablation());
    const double fd_nodt = frechet_of("no-dt", "final.ckpt");
    const double acc_full = accuracy_of("main", main_at_ablation());
    const double acc_dt1 = accuracy_of("dt1", "final.ckpt");
    const bool pass = fd_nodt > fd_full && acc_full > acc_dt1;
    return {8, pass,
            "Frechet(" + extractor.id() + ") full " + fmt(fd_full) + " vs no-D_t " + fmt(fd_nodt) +
                "; held-out action accuracy full " + fmt(acc_full) + " vs 1-frame D_t " + fmt(acc_dt1) + " (at " +
                std::to_string(kAblationIters) + " iters)"};
  }

  Outcome criterion_9() {
    double lambda = 1.0;
    auto model = load("main", "final.ckpt", &lambda);
    const ConditionLabel label{1, 0};
    VideoClip clip;
    {
      torch::NoGradGuard guard;
      auto w_c = model->content(ids(label.actor_id), ids(label.action_id), lambda);
      clip = model->render_clip(w_c, mapped_m(model, 900), frame_times(64));
      clip.label = label;
    }
    auto w = invert_frame_styles(model, clip, label, 100, 2e-2, dist_, lambda).to(torch::kFloat64).contiguous();
    Eigen::MatrixXd traj = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data_ptr<double>(), w.size(0), w.size(1));
    auto first_pc_content = [](const Eigen::MatrixXd& x) {
      auto pca = pca_trajectory(x);
      std::vector<double> p(static_cast<std::size_t>(x.rows()));
      for (int t = 0; t < x.rows(); ++t) p[static_cast<std::size_t>(t)] = pca.projections(t, 0);
      return cosine_content(p, 1);
    };
    const double c1 = first_pc_content(traj);

    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    std::vector<double> base;
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::MatrixXd noise(traj.rows(), traj.cols());
      for (int i = 0; i < noise.rows(); ++i)
        for (int j = 0; j < noise.cols(); ++j) noise(i, j) = nd(rng);
      base.push_back(first_pc_content(noise));
    }
    double mean = 0, var = 0;
    for (double b : base) mean += b / base.size();
    for (double b : base) var += (b - mean) * (b - mean) / (base.size() - 1);
    const double sd = std::sqrt(var);
    const bool pass = c1 >= 0.5 && c1 >= mean + 3 * sd;
    return {9, pass,
            "c_1 = " + fmt(c1) + " (>= 0.5); white-noise baseline " + fmt(mean) + " +/- " + fmt(sd) +
                ", threshold " + fmt(mean + 3 * sd)};
  }

  fs::path runs_;
  std::string cli_, unit_tests_;
  CorpusIndex index_;
  std::vector<VideoClip> train_, test_;
  OracleClassifier oracle_;
  PerceptualDistance dist_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string runs;
  if (const char* env = std::getenv("TEMPOSTYLE_RUNS")) {
    runs = (fs::path(env) / "acceptance").string();
  } else {
    runs = TEMPOSTYLE_DEFAULT_RUNS;
  }
  app.add_option("--runs", runs, "Directory holding (or receiving) the corpus and training runs");
  CLI11_PARSE(app, argc, argv);

  at::set_num_threads(1);
  torch::manual_seed(0);
  try {
    Acceptance acc(runs, TEMPOSTYLE_CLI, TEMPOSTYLE_UNIT_TESTS);
    acc.prepare();
    auto outcomes = acc.run_all();
    bool all = true;
    Json report = Json::array();
    for (const auto& o : outcomes) {
      std::cout << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail << std::endl;
      report.push_back({{"criterion", o.id}, {"pass", o.pass}, {"detail", o.detail}});
      all = all && o.pass;
    }
    write_json_file_atomic((fs::path(runs) / "acceptance_report.json").string(), report);
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
}
