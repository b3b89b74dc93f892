#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tempostyle/checkpoint.hpp"
#include "tempostyle/dataio.hpp"
#include "tempostyle/errors.hpp"
#include "tempostyle/training.hpp"

using namespace tempostyle;
namespace fs = std::filesystem;

namespace {

long double softplus_ld(long double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// One tiny corpus shared by every test in this file.
const std::string& corpus_root() {
  static testing::TempDir dir;
  static bool built = false;
  if (!built) {
    build_dataset(testing::tiny_corpus(), dir.str("data"));
    built = true;
  }
  static std::string root = dir.str("data");
  return root;
}

Trainer make_trainer(TrainConfig cfg) {
  auto index = load_index(cfg.dataset);
  return Trainer(cfg, load_split(cfg.dataset, "train"), index.vocabulary);
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_parameters(const VideoGAN& a, const VideoGAN& b) {
  auto pa = a->named_parameters(true), pb = b->named_parameters(true);
  if (pa.size() != pb.size()) return false;
  for (const auto& item : pa) {
    if (!testing::bitwise_equal(item.value(), pb[item.key()])) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("non-saturating losses against a long-double oracle") {
    auto logits = torch::tensor({-10.0, -1.0, 0.0, 2.5, 30.0}, torch::kFloat64);
    long double g = 0, d_fake = 0, d_real = 0;
    for (double x : {-10.0, -1.0, 0.0, 2.5, 30.0}) {
      g += softplus_ld(-x);
      d_fake += softplus_ld(x);
      d_real += softplus_ld(-x);
    }
    CHECK(nonsaturating_g_loss(logits).item<double>() == doctest::Approx(static_cast<double>(g / 5)).epsilon(1e-12));
    CHECK(logistic_d_loss(logits, logits).item<double>() ==
          doctest::Approx(static_cast<double>((d_fake + d_real) / 5)).epsilon(1e-12));
    // softplus(10) = 10.0000453989...
    CHECK(nonsaturating_g_loss(torch::tensor({-10.0}, torch::kFloat64)).item<double>() ==
          doctest::Approx(10.000045398899218).epsilon(1e-12));
    CHECK(nonsaturating_g_loss(torch::tensor({0.0}, torch::kFloat64)).item<double>() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }

  TEST_CASE("R1 of a linear discriminator is gamma/2 |a|^2") {
    auto a = torch::tensor({0.5, -2.0, 1.5, 3.0}, torch::kFloat64);
    auto x = torch::randn({6, 4}, torch::kFloat64).requires_grad_(true);
    auto logits = torch::matmul(x, a) + 0.3;
    const double gamma = 0.0128;
    const double expect = 0.5 * gamma * a.square().sum().item<double>();
    CHECK(r1_penalty(logits, {x}, gamma).item<double>() == doctest::Approx(expect).epsilon(1e-12));

    // Two inputs contribute additively.
    auto y = torch::randn({6, 2}, torch::kFloat64).requires_grad_(true);
    auto b = torch::tensor({1.0, -1.0}, torch::kFloat64);
    auto logits2 = torch::matmul(x, a) + torch::matmul(y, b);
    CHECK(r1_penalty(logits2, {x, y}, gamma).item<double>() ==
          doctest::Approx(0.5 * gamma * (a.square().sum() + b.square().sum()).item<double>()).epsilon(1e-12));
  }

  TEST_CASE("Adam with beta1 = 0 takes sign-like first steps") {
    auto p = torch::tensor({1.0, -2.0, 3.0}, torch::kFloat64).requires_grad_(true);
    Adam opt({{"p", p}}, Adam::Options{0.1, 0.0, 0.99, 1e-8});
    opt.zero_grad();
    (p * torch::tensor({2.0, -0.5, 0.0}, torch::kFloat64)).sum().backward();
    opt.step();
    CHECK(opt.steps() == 1);
    CHECK(p[0].item<double>() == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(p[1].item<double>() == doctest::Approx(-1.9).epsilon(1e-7));
    CHECK(p[2].item<double>() == 3.0);
  }

  TEST_CASE("real triplets are consecutive and cover every start") {
    auto clips = load_split(corpus_root(), "train");
    REQUIRE_FALSE(clips.empty());
    const auto& clip = clips.front();
    std::mt19937_64 rng(4);
    std::set<int64_t> starts;
    for (int i = 0; i < 2000; ++i) {
      auto t = sample_real_triplet(clip, rng);
      starts.insert(t.start);
      CHECK(t.frames.sizes() == torch::IntArrayRef({3, 3, 16, 16}));
      for (int64_t j = 0; j < 3; ++j) {
        CHECK(t.times[j].item<double>() == clip.timepoints[static_cast<std::size_t>(t.start + j)]);
        CHECK(torch::equal(t.frames[j], clip.frames[t.start + j]));
      }
    }
    CHECK(static_cast<int64_t>(starts.size()) == clip.length() - 2);
    CHECK(*starts.begin() == 0);
    CHECK(*starts.rbegin() == clip.length() - 3);

    VideoClip shortclip{clip.frames.slice(0, 0, 2), {0.0, 1.0}, clip.label, {}};
    CHECK_THROWS_AS(sample_real_triplet(shortclip, rng), DomainError);
  }

  TEST_CASE("config round trip and strict keys") {
    TrainConfig c = testing::tiny_train("x");
    auto back = train_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    auto j = to_json(c);
    j["bogus_key"] = 1;
    try {
      train_config_from_json(j);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    auto jm = to_json(c);
    jm["model"]["mystery"] = 2;
    CHECK_THROWS_AS(train_config_from_json(jm), ConfigError);
    auto jt = to_json(c);
    jt["batch_size"] = "four";
    CHECK_THROWS_AS(train_config_from_json(jt), ConfigError);
  }

  TEST_CASE("lambda schedule") {
    TrainConfig c = testing::tiny_train("x");
    c.ramp = {4000, 6000};
    CHECK(c.lambda_at(0) == 0.0);
    CHECK(c.lambda_at(5000) == 0.5);
    CHECK(c.lambda_at(7000) == 1.0);
    c.use_ramp = false;
    CHECK(c.lambda_at(0) == 1.0);
  }

  TEST_CASE("ablation variants") {
    TrainConfig c = testing::tiny_train("x");
    apply_variant(c, "no-ramp");
    CHECK_FALSE(c.use_ramp);
    apply_variant(c, "dt1");
    CHECK(c.model.dt_frames == 1);
    apply_variant(c, "k4");
    CHECK(c.model.k == 4);
    TrainConfig d = testing::tiny_train("x");
    apply_variant(d, "no-dt");
    CHECK_FALSE(d.model.use_dt);
    apply_variant(d, "full");
    CHECK_FALSE(d.model.use_dt);
    try {
      apply_variant(d, "no-everything");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("no-everything") != std::string::npos);
    }
  }

  TEST_CASE("training is bitwise deterministic for a fixed seed") {
    auto cfg = testing::tiny_train(corpus_root());
    cfg.seed = 17;
    Trainer a = make_trainer(cfg), b = make_trainer(cfg);
    for (int i = 0; i < 50; ++i) {
      auto sa = a.step();
      auto sb = b.step();
      REQUIRE(sa.g_loss == sb.g_loss);
      REQUIRE(sa.d_loss == sb.d_loss);
    }
    CHECK(same_parameters(a.model(), b.model()));

    cfg.seed = 18;
    Trainer c = make_trainer(cfg);
    for (int i = 0; i < 5; ++i) c.step();
    CHECK_FALSE(same_parameters(a.model(), c.model()));
  }

  TEST_CASE("checkpoint round trip is byte identical and resume continues exactly") {
    testing::TempDir tmp;
    auto cfg = testing::tiny_train(corpus_root());
    cfg.seed = 5;
    Trainer a = make_trainer(cfg);
    for (int i = 0; i < 10; ++i) a.step();
    save_checkpoint(tmp.str("a.ckpt"), a.checkpoint());
    auto loaded = load_checkpoint(tmp.str("a.ckpt"));
    save_checkpoint(tmp.str("b.ckpt"), loaded);
    CHECK(read_bytes(tmp.str("a.ckpt")) == read_bytes(tmp.str("b.ckpt")));
    CHECK(loaded.manifest.at("iteration").get<int64_t>() == 10);

    Trainer r = Trainer::resume(loaded, load_split(cfg.dataset, "train"));
    CHECK(r.iteration() == 10);
    for (int i = 0; i < 8; ++i) {
      auto sa = a.step();
      auto sr = r.step();
      CHECK(sa.g_loss == sr.g_loss);
      CHECK(sa.d_loss == sr.d_loss);
    }
    CHECK(same_parameters(a.model(), r.model()));
  }

  TEST_CASE("every parameter receives a gradient within 100 iterations") {
    auto cfg = testing::tiny_train(corpus_root());
    Trainer t = make_trainer(cfg);
    for (int i = 0; i < 100; ++i) t.step();
    const auto missing = t.parameters_without_gradient();
    for (const auto& name : missing) INFO(name);
    CHECK(missing.empty());
  }

  TEST_CASE("short training run writes finite metrics that follow the ramp") {
    testing::TempDir tmp;
    auto cfg = testing::tiny_train(corpus_root());
    cfg.total_iters = 200;
    cfg.ramp = {50, 150};
    cfg.log_every = 10;
    cfg.checkpoint_every = 100;
    int logged = 0;
    auto final_ck = run_training(cfg, TrainRunOptions{tmp.str("run"), std::nullopt,
                                                      [&](const IterationStats&) { ++logged; }});
    CHECK(final_ck.manifest.at("iteration").get<int64_t>() == 200);
    CHECK(fs::exists(tmp.path() / "run" / "final.ckpt"));
    CHECK(fs::exists(tmp.path() / "run" / "ckpt_000100.ckpt"));

    std::ifstream in(tmp.path() / "run" / "metrics.ndjson");
    std::string line;
    int lines = 0, r1_lines = 0;
    while (std::getline(in, line)) {
      auto j = Json::parse(line);
      ++lines;
      CHECK(std::isfinite(j.at("g_loss").get<double>()));
      CHECK(std::isfinite(j.at("d_loss").get<double>()));
      CHECK(j.at("lambda").get<double>() == cfg.lambda_at(j.at("iter").get<int64_t>()));
      if (!j.at("r1").is_null()) ++r1_lines;
    }
    CHECK(lines == logged);
    CHECK(lines >= 20);
    CHECK(r1_lines == (200 + 15) / 16);  // iterations 0, 16, ..., 192
    CHECK(checkpoint_lambda(final_ck) == 1.0);
  }

  TEST_CASE("short clips are skipped and vocabulary mismatches rejected") {
    auto cfg = testing::tiny_train(corpus_root());
    auto index = load_index(cfg.dataset);
    auto clips = load_split(cfg.dataset, "train");
    auto vocab = index.vocabulary;
    vocab.actors.push_back("extra");
    CHECK_THROWS_AS(Trainer(cfg, clips, vocab), ConfigError);
    std::vector<VideoClip> none;
    CHECK_THROWS(Trainer(cfg, none, index.vocabulary));
  }

  TEST_CASE("divergence aborts with a dump") {
    testing::TempDir tmp;
    auto cfg = testing::tiny_train(corpus_root());
    cfg.g_lr = 1e30;
    cfg.d_lr = 1e30;
    cfg.total_iters = 50;
    CHECK_THROWS_AS(run_training(cfg, TrainRunOptions{tmp.str("run"), std::nullopt, {}}), TrainingDiverged);
    CHECK(fs::exists(tmp.path() / "run" / "abort_dump.json"));
    CHECK(fs::exists(tmp.path() / "run" / "abort.ckpt"));
  }
}
