#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tempostyle/analysis.hpp"
#include "tempostyle/dataio.hpp"
#include "tempostyle/errors.hpp"
#include "tempostyle/png_io.hpp"

using namespace tempostyle;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("dataio") {
  TEST_CASE("rendering is deterministic") {
    SynthSpec spec = testing::tiny_corpus();
    auto a = render_synth_clip(2, 1, 10, 0.4, spec);
    auto b = render_synth_clip(2, 1, 10, 0.4, spec);
    CHECK(torch::equal(a.frames, b.frames));
    CHECK(a.label == ConditionLabel{2, 1});
    CHECK(a.landmarks.size() == 10);
    CHECK_NOTHROW(a.validate());
    auto c = render_synth_clip(2, 1, 10, 1.4, spec);
    CHECK_FALSE(torch::equal(a.frames, c.frames));
  }

  TEST_CASE("every motion program is periodic") {
    for (int action = 0; action < kNumSynthActions; ++action) {
      const double period = synth_action_period(action);
      CHECK(period > 0);
      for (double t : {0.0, 1.5, 7.25}) {
        auto p = synth_polygon(0, action, t, 0.2, 32);
        auto q = synth_polygon(0, action, t + period, 0.2, 32);
        REQUIRE(p.points.size() == q.points.size());
        for (std::size_t i = 0; i < p.points.size(); ++i) {
          CHECK(p.points[i].x == doctest::Approx(q.points[i].x).epsilon(1e-9));
          CHECK(p.points[i].y == doctest::Approx(q.points[i].y).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("rendered coverage matches the analytic polygon area") {
    SynthSpec spec;
    spec.resolution = 32;
    for (int actor = 0; actor < 4; ++actor) {
      for (int action = 0; action < 4; ++action) {
        for (double t : {0.0, 3.0, 5.5}) {
          auto [frame, poly] = render_synth_frame(actor, action, t, 0.1, spec);
          auto cov = ((std::get<0>(frame.pixels.max(0)) + 1) / 2).clamp(0, 1);
          const double area = polygon_area(poly);
          CHECK(std::abs(cov.sum().item<double>() - area) <= 0.02 * area);
        }
      }
    }
  }

  TEST_CASE("unknown ids are rejected") {
    SynthSpec spec = testing::tiny_corpus();
    CHECK_THROWS_AS(render_synth_frame(kMaxSynthActors, 0, 0.0, 0.0, spec), LookupError);
    CHECK_THROWS_AS(render_synth_frame(0, kNumSynthActions, 0.0, 0.0, spec), LookupError);
  }

  TEST_CASE("spec validation and json round trip") {
    SynthSpec s;
    CHECK_NOTHROW(s.validate());
    CHECK(to_json(synth_spec_from_json(to_json(s))) == to_json(s));
    auto bad = s;
    bad.resolution = 24;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.min_length = 4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.holdout = {{9, 0}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.phase_spread = 7.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    auto j = to_json(s);
    j["colour"] = "red";
    CHECK_THROWS_AS(synth_spec_from_json(j), ConfigError);
  }

  TEST_CASE("corpus layout, splits and byte-identical regeneration") {
    testing::TempDir tmp;
    SynthSpec spec = testing::tiny_corpus();
    spec.clips_per_cell = 2;
    auto index = build_dataset(spec, tmp.str("a"));
    build_dataset(spec, tmp.str("b"));
    CHECK(index.clips.size() == 32);
    for (const auto& e : index.clips) {
      CHECK((e.split == "test") == spec.is_holdout(e.actor, e.action));
      CHECK(e.length >= spec.min_length);
      CHECK(e.phase >= 0.0);
      CHECK(e.phase < spec.phase_spread);
      CHECK(e.length <= spec.max_length);
      CHECK(fs::exists(fs::path(clip_path(tmp.str("a"), e)) / "meta.json"));
    }
    CHECK(index.split("test").size() == 8);

    std::set<std::string> cells;
    for (const auto& e : index.split("train")) cells.insert(std::to_string(e.actor) + "," + std::to_string(e.action));
    CHECK(cells.size() == 12);

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(tmp.path() / "a")) {
      if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), tmp.path() / "a"));
    }
    CHECK(files.size() > 64);
    for (const auto& f : files) {
      REQUIRE(fs::exists(tmp.path() / "b" / f));
      CHECK(read_bytes(tmp.path() / "a" / f) == read_bytes(tmp.path() / "b" / f));
    }

    auto loaded = load_index(tmp.str("a"));
    CHECK(loaded.clips.size() == index.clips.size());
    CHECK(loaded.vocabulary.actors == spec.vocabulary().actors);
    auto test_clips = load_split(tmp.str("a"), "test");
    CHECK(test_clips.size() == 8);
    CHECK(find_clip_dirs(tmp.str("a")).size() == 32);
    CHECK(load_clip_tree(tmp.str("a") + "/test").size() == 8);
  }

  TEST_CASE("png round trip within one quantization level") {
    testing::TempDir tmp;
    torch::manual_seed(1);
    auto img = torch::rand({3, 9, 7}) * 2 - 1;
    write_png(tmp.str("x.png"), img);
    auto back = read_png(tmp.str("x.png"));
    CHECK(back.sizes() == img.sizes());
    CHECK((back - img).abs().max().item<double>() <= 1.0 / 255.0 + 1e-6);
    CHECK_THROWS_AS(read_png(tmp.str("missing.png")), IoError);
  }

  TEST_CASE("clip write and load round trip") {
    testing::TempDir tmp;
    SynthSpec spec = testing::tiny_corpus();
    auto clip = render_synth_clip(1, 2, 9, 0.0, spec);
    clip.timepoints = {0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4};
    write_clip(clip, tmp.str("c"));
    auto back = load_frames_dir(tmp.str("c"));
    CHECK(back.timepoints == clip.timepoints);
    CHECK(back.label == clip.label);
    CHECK(back.landmarks.size() == clip.landmarks.size());
    CHECK((back.frames - clip.frames).abs().max().item<double>() <= 1.0 / 255.0 + 1e-6);
  }

  TEST_CASE("loading malformed frame directories fails cleanly") {
    testing::TempDir tmp;
    CHECK_THROWS_AS(load_frames_dir(tmp.str("nothing")), IoError);
    fs::create_directories(tmp.path() / "empty");
    CHECK_THROWS_AS(load_frames_dir(tmp.str("empty")), IoError);
    CHECK_THROWS_AS(load_clip_tree(tmp.str("empty")), IoError);

    auto img = torch::zeros({3, 8, 8});
    fs::create_directories(tmp.path() / "gap");
    write_png(tmp.str("gap/frame_00000.png"), img);
    write_png(tmp.str("gap/frame_00002.png"), img);
    CHECK_THROWS_AS(load_frames_dir(tmp.str("gap")), IoError);

    fs::create_directories(tmp.path() / "plain");
    write_png(tmp.str("plain/frame_00000.png"), img);
    write_png(tmp.str("plain/frame_00001.png"), img);
    auto plain = load_frames_dir(tmp.str("plain"));
    CHECK(plain.timepoints == std::vector<double>{0.0, 1.0});
    CHECK_FALSE(plain.label.has_value());

    write_json_file_atomic(tmp.str("plain/meta.json"), Json{{"timepoints", {0.0, 1.0, 2.0}}});
    CHECK_THROWS_AS(load_frames_dir(tmp.str("plain")), IoError);
    write_json_file_atomic(tmp.str("plain/meta.json"), Json{{"timepoints", {1.0, 0.5}}});
    CHECK_THROWS_AS(load_frames_dir(tmp.str("plain")), IoError);

    std::ofstream(tmp.path() / "plain" / "frame_00002.png") << "not a png";
    write_json_file_atomic(tmp.str("plain/meta.json"), Json{{"timepoints", {0.0, 1.0, 2.0}}});
    CHECK_THROWS_AS(load_frames_dir(tmp.str("plain")), IoError);
    CHECK_THROWS_AS(load_index(tmp.str("nothing")), IoError);
  }
}
