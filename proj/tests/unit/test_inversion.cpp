#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "support.hpp"
#include "tempostyle/errors.hpp"
#include "tempostyle/inversion.hpp"
#include "tempostyle/perceptual.hpp"

using namespace tempostyle;

namespace {

torch::Tensor ids(int64_t v) { return torch::tensor({v}, torch::kInt64); }

std::vector<double> frame_times(int n, double t0 = 0.0) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(t0 + i);
  return t;
}

// A target clip rendered by the model itself from a known motion style. Starts at t = 3
// because at t = 0 the linear basis term and the zero-phase sines all vanish.
VideoClip self_clip(VideoGAN& model, const std::vector<double>& m, const ConditionLabel& label, int n) {
  return transfer_motion(model, MotionStyle{m}, label, frame_times(n, 3.0));
}

std::vector<double> random_m(int64_t k, uint64_t seed) {
  auto g = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto t = torch::randn({k}, g, torch::kFloat64);
  return std::vector<double>(t.data_ptr<double>(), t.data_ptr<double>() + k);
}

}  // namespace

TEST_SUITE("inversion") {
  TEST_CASE("perceptual distance basics") {
    PerceptualDistance d;
    torch::manual_seed(1);
    auto a = torch::rand({2, 3, 16, 16}) * 2 - 1;
    auto b = torch::rand({2, 3, 16, 16}) * 2 - 1;
    auto self = d.per_frame(a, a);
    CHECK(torch::allclose(self, torch::zeros({2}), 0, 1e-7));
    CHECK(torch::allclose(d.per_frame(a, b), d.per_frame(b, a), 1e-6, 1e-7));
    CHECK((d.per_frame(a, b) > 0).all().item<bool>());

    auto c = torch::zeros({1, 3, 8, 8});
    CHECK(PerceptualDistance::per_frame_mse(c, c + 0.1).item<double>() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK_THROWS_AS(d.per_frame(a, b.slice(2, 0, 8)), ShapeError);

    Frame fa{a[0], 0.0}, fb{b[0], 0.0};
    auto terms = d.terms(fa, fb);
    CHECK(terms.layers.size() == 3);
    double sum = 0;
    for (double v : terms.layers) sum += v;
    CHECK(terms.perceptual == doctest::Approx(sum));
    CHECK(terms.total == doctest::Approx(terms.perceptual + terms.mse));
    CHECK(d(fa, fb) == terms.total);
  }

  TEST_CASE("backbone is reproducible from its seed") {
    RandomConvBackbone a(7), b(7), c(8);
    auto x = torch::rand({1, 3, 16, 16});
    auto fa = a.features(x), fb = b.features(x), fc = c.features(x);
    REQUIRE(fa.size() == 3);
    CHECK(torch::equal(fa[2], fb[2]));
    CHECK_FALSE(torch::equal(fa[2], fc[2]));
    CHECK(a.id() != c.id());
  }

  TEST_CASE("inversion never writes model weights") {
    torch::manual_seed(2);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{1, 2};
    auto clip = self_clip(model, random_m(8, 3), label, 6);
    const auto before = parameter_hash(model->generator_parameters());
    const auto before_d = parameter_hash(model->discriminator_parameters());
    InversionConfig cfg;
    cfg.steps = 10;
    cfg.restarts = 1;
    cfg.restart_steps = 3;
    invert_motion(model, clip, label, cfg, PerceptualDistance());
    CHECK(parameter_hash(model->generator_parameters()) == before);
    CHECK(parameter_hash(model->discriminator_parameters()) == before_d);
    for (const auto& p : model->parameters()) CHECK_FALSE(p.grad().defined());
  }

  TEST_CASE("starting at the true motion style gives zero loss") {
    torch::manual_seed(4);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{0, 3};
    const auto m_true = random_m(8, 5);
    auto clip = self_clip(model, m_true, label, 5);
    InversionConfig cfg;
    cfg.steps = 1;
    cfg.init_m = m_true;
    auto res = invert_motion(model, clip, label, cfg, PerceptualDistance());
    CHECK(res.initial_loss <= 1e-8);
    CHECK(res.best_loss <= 1e-8);
    CHECK(res.best_step == 0);
    REQUIRE(res.m_star.m.size() == m_true.size());
    for (std::size_t i = 0; i < m_true.size(); ++i) CHECK(res.m_star.m[i] == doctest::Approx(m_true[i]).epsilon(1e-6));
  }

  TEST_CASE("single-frame inversion reduces the loss") {
    torch::manual_seed(6);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{2, 1};
    auto clip = self_clip(model, random_m(8, 7), label, 1);
    InversionConfig cfg;
    cfg.steps = 40;
    cfg.lr = 5e-2;
    cfg.restarts = 0;
    auto res = invert_motion(model, clip, label, cfg, PerceptualDistance());
    CHECK(res.trace.size() == 41);
    CHECK(res.trace.front() == res.initial_loss);
    CHECK(res.best_loss < res.initial_loss);
    CHECK(res.best_loss == doctest::Approx(res.trace[static_cast<std::size_t>(res.best_step)]));
    CHECK(res.m_star.m.size() == 8);
  }

  TEST_CASE("inversion input checks") {
    VideoGAN model(testing::tiny_model());
    auto clip = self_clip(model, random_m(8, 1), {0, 0}, 3);
    InversionConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_AS(invert_motion(model, clip, {0, 0}, cfg, PerceptualDistance()), ConfigError);
    cfg.steps = 1;
    cfg.max_frames = 121;
    CHECK_THROWS_AS(invert_motion(model, clip, {0, 0}, cfg, PerceptualDistance()), ConfigError);
    cfg.max_frames = 8;
    CHECK_THROWS_AS(invert_motion(model, clip, {9, 0}, cfg, PerceptualDistance()), LookupError);
    cfg.init_m = std::vector<double>(3, 0.0);
    CHECK_THROWS(invert_motion(model, clip, {0, 0}, cfg, PerceptualDistance()));

    auto cond_off = testing::tiny_model();
    cond_off.conditional = false;
    VideoGAN uncond(cond_off);
    cfg.init_m.reset();
    CHECK_THROWS_AS(invert_motion(uncond, clip, {0, 0}, cfg, PerceptualDistance()), ConfigError);
  }

  TEST_CASE("zero tuning steps return identical weights") {
    torch::manual_seed(8);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{1, 1};
    const auto m = random_m(8, 9);
    auto clip = self_clip(model, m, label, 4);
    TuneConfig cfg;
    cfg.steps = 0;
    auto res = pivotal_tune(model, MotionStyle{m}, clip, label, cfg, PerceptualDistance());
    CHECK_FALSE(res.diverged);
    auto a = model->named_parameters(true), b = res.model->named_parameters(true);
    for (const auto& item : a) CHECK(testing::bitwise_equal(item.value(), b[item.key()]));
    CHECK(res.loss_after == res.loss_before);
  }

  TEST_CASE("tuning reduces reconstruction error and leaves the source model alone") {
    torch::manual_seed(10);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{3, 2};
    // Target from a different random generator so the fit is imperfect.
    torch::manual_seed(11);
    VideoGAN other(testing::tiny_model());
    auto clip = self_clip(other, random_m(8, 12), label, 4);
    const auto m = random_m(8, 13);
    const auto before = parameter_hash(model->generator_parameters());
    TuneConfig cfg;
    cfg.steps = 40;
    cfg.lr = 3e-3;
    auto res = pivotal_tune(model, MotionStyle{m}, clip, label, cfg, PerceptualDistance());
    CHECK_FALSE(res.diverged);
    CHECK(res.loss_after < res.loss_before);
    CHECK(res.mse_after < res.mse_before);
    CHECK(res.trace.size() == 41);
    CHECK(parameter_hash(model->generator_parameters()) == before);

    // Only synthesis weights move.
    auto a = model->named_parameters(true), b = res.model->named_parameters(true);
    bool g_changed = false;
    for (const auto& item : a) {
      const bool same = testing::bitwise_equal(item.value(), b[item.key()]);
      if (item.key().rfind("g.", 0) == 0) {
        g_changed = g_changed || !same;
      } else {
        CHECK(same);
      }
    }
    CHECK(g_changed);
  }

  TEST_CASE("tuning with an absurd learning rate aborts and keeps the original") {
    torch::manual_seed(14);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{0, 0};
    // Nearly reconstructed target, so the initial loss is small and a blow-up exceeds 10x.
    auto m = random_m(8, 16);
    auto clip = self_clip(model, m, label, 3);
    for (auto& v : m) v += 0.05;
    TuneConfig cfg;
    cfg.steps = 20;
    cfg.lr = 1e4;
    auto res = pivotal_tune(model, MotionStyle{m}, clip, label, cfg, PerceptualDistance());
    CHECK(res.diverged);
    auto a = model->named_parameters(true), b = res.model->named_parameters(true);
    for (const auto& item : a) CHECK(testing::bitwise_equal(item.value(), b[item.key()]));
  }

  TEST_CASE("transfer under the source label reproduces the source clip") {
    torch::manual_seed(18);
    VideoGAN model(testing::tiny_model());
    const auto m = random_m(8, 19);
    auto a = transfer_motion(model, MotionStyle{m}, {1, 3}, frame_times(5));
    torch::NoGradGuard guard;
    auto w_c = model->content(ids(1), ids(3), 1.0);
    auto ref = model->render_clip(w_c, torch::tensor(m).to(torch::kFloat32).reshape({1, -1}), frame_times(5));
    CHECK(torch::equal(a.frames, ref.frames));
    CHECK(a.label == ConditionLabel{1, 3});
    auto b = transfer_motion(model, MotionStyle{m}, {2, 3}, frame_times(5));
    CHECK_FALSE(torch::equal(a.frames, b.frames));
    CHECK_THROWS_AS(transfer_motion(model, MotionStyle{{1.0}}, {0, 0}, frame_times(2)), ShapeError);
  }

  TEST_CASE("per-frame temporal styles") {
    torch::manual_seed(20);
    VideoGAN model(testing::tiny_model());
    const ConditionLabel label{1, 0};
    auto clip = self_clip(model, random_m(8, 21), label, 3);
    auto w = invert_frame_styles(model, clip, label, 5, 2e-2, PerceptualDistance());
    CHECK(w.sizes() == torch::IntArrayRef({3, 8}));
    CHECK(torch::isfinite(w).all().item<bool>());
  }

  TEST_CASE("motion style file round trip") {
    testing::TempDir tmp;
    MotionStyleFile f{MotionStyle{{0.25, -1.5, 3.0}}, "abc123", ConditionLabel{2, 1}, 0.125};
    write_motion_style(tmp.str("m.json"), f);
    auto back = read_motion_style(tmp.str("m.json"));
    CHECK(back.m.m == f.m.m);
    CHECK(back.config_hash == "abc123");
    CHECK(back.label == f.label);
    CHECK(back.loss == 0.125);

    auto j = read_json_file(tmp.str("m.json"));
    j["extra"] = true;
    write_json_file_atomic(tmp.str("bad.json"), j);
    CHECK_THROWS_AS(read_motion_style(tmp.str("bad.json")), ConfigError);
    CHECK_THROWS_AS(read_motion_style(tmp.str("missing.json")), IoError);

    CHECK(model_config_hash(testing::tiny_model()) == model_config_hash(testing::tiny_model()));
    auto other = testing::tiny_model();
    other.k = 4;
    CHECK(model_config_hash(other) != model_config_hash(testing::tiny_model()));
  }
}
