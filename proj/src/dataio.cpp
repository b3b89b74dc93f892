#include "tempostyle/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <regex>

#include "tempostyle/errors.hpp"
#include "tempostyle/kernels.hpp"
#include "tempostyle/png_io.hpp"

namespace fs = std::filesystem;

namespace tempostyle {

namespace {

struct ActorLook {
  const char* name;
  int sides;
  float r, g, b;
};

// Saturated colors: the brightest channel is always +1, so foreground coverage can be
// read back from the maximum channel regardless of hue.
constexpr std::array<ActorLook, kMaxSynthActors> kActors{{
    {"red-square", 4, 1.f, -1.f, -1.f},
    {"green-pentagon", 5, -1.f, 1.f, -1.f},
    {"blue-triangle", 3, -1.f, -1.f, 1.f},
    {"yellow-hexagon", 6, 1.f, 1.f, -1.f},
    {"cyan-heptagon", 7, -1.f, 1.f, 1.f},
    {"magenta-square", 4, 1.f, -1.f, 1.f},
    {"white-pentagon", 5, 1.f, 1.f, 1.f},
    {"orange-hexagon", 6, 1.f, 0.f, -1.f},
}};

constexpr std::array<const char*, kNumSynthActions> kActions{
    {"pulsate", "translate-bounce", "rotate", "wave"}};
constexpr std::array<double, kNumSynthActions> kPeriods{{12.0, 16.0, 20.0, 10.0}};

constexpr double kBaseRadius = 0.21;  // fraction of the frame side
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_ids(int actor, int action) {
  if (actor < 0 || actor >= kMaxSynthActors) throw LookupError("synthetic actor id out of range");
  if (action < 0 || action >= kNumSynthActions) throw LookupError("synthetic action id out of range");
}

// Circumradius factor giving every n-gon the same area as a circle of radius 1.
double equal_area_radius(int sides) {
  return std::sqrt(std::numbers::pi / (0.5 * sides * std::sin(kTwoPi / sides)));
}

double triangle_wave(double u) { return 1.0 - 4.0 * std::abs(u + 0.25 - std::floor(u + 0.25) - 0.5); }

std::string frame_name(int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05lld.png", static_cast<long long>(i));
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_actors < 2 || n_actors > kMaxSynthActors) {
    throw ConfigError("synth: n_actors must lie in [2, " + std::to_string(kMaxSynthActors) + "]");
  }
  if (n_actions < 2 || n_actions > kNumSynthActions) {
    throw ConfigError("synth: n_actions must lie in [2, " + std::to_string(kNumSynthActions) + "]");
  }
  if (min_length < 8 || max_length < min_length) throw ConfigError("synth: need 8 <= min_length <= max_length");
  if (clips_per_cell < 1) throw ConfigError("synth: clips_per_cell must be positive");
  if (resolution < 8 || (resolution & (resolution - 1)) != 0) {
    throw ConfigError("synth: resolution must be a power of two >= 8");
  }
  if (!(fps > 0)) throw ConfigError("synth: fps must be positive");
  if (supersample < 1) throw ConfigError("synth: supersample must be positive");
  if (!(phase_spread >= 0 && phase_spread <= kTwoPi)) throw ConfigError("synth: phase_spread must lie in [0, 2 pi]");
  for (auto [a, b] : holdout) {
    if (a < 0 || a >= n_actors || b < 0 || b >= n_actions) throw ConfigError("synth: holdout cell out of range");
  }
}

LabelVocabulary SynthSpec::vocabulary() const {
  LabelVocabulary v;
  for (int a = 0; a < n_actors; ++a) v.actors.emplace_back(kActors[a].name);
  for (int b = 0; b < n_actions; ++b) v.actions.emplace_back(kActions[b]);
  return v;
}

bool SynthSpec::is_holdout(int actor, int action) const {
  return std::find(holdout.begin(), holdout.end(), std::make_pair(actor, action)) != holdout.end();
}

Json to_json(const SynthSpec& s) {
  Json cells = Json::array();
  for (auto [a, b] : s.holdout) cells.push_back({a, b});
  return Json{{"n_actors", s.n_actors},         {"n_actions", s.n_actions},
              {"clips_per_cell", s.clips_per_cell}, {"min_length", s.min_length},
              {"max_length", s.max_length},     {"resolution", s.resolution},
              {"fps", s.fps},                   {"supersample", s.supersample},
              {"seed", s.seed},                 {"phase_spread", s.phase_spread},
              {"holdout", cells}};
}

SynthSpec synth_spec_from_json(const Json& j) {
  require_known_keys(j,
                     {"n_actors", "n_actions", "clips_per_cell", "min_length", "max_length",
                      "resolution", "fps", "supersample", "seed", "phase_spread", "holdout"},
                     "synth");
  SynthSpec s;
  try {
    s.n_actors = json_get_or(j, "n_actors", s.n_actors);
    s.n_actions = json_get_or(j, "n_actions", s.n_actions);
    s.clips_per_cell = json_get_or(j, "clips_per_cell", s.clips_per_cell);
    s.min_length = json_get_or(j, "min_length", s.min_length);
    s.max_length = json_get_or(j, "max_length", s.max_length);
    s.resolution = json_get_or(j, "resolution", s.resolution);
    s.fps = json_get_or(j, "fps", s.fps);
    s.supersample = json_get_or(j, "supersample", s.supersample);
    s.seed = json_get_or(j, "seed", s.seed);
    s.phase_spread = json_get_or(j, "phase_spread", s.phase_spread);
    if (j.contains("holdout")) {
      s.holdout.clear();
      for (const auto& c : j["holdout"]) s.holdout.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  s.validate();
  return s;
}

const char* synth_actor_name(int actor) {
  check_ids(actor, 0);
  return kActors[actor].name;
}

const char* synth_action_name(int action) {
  check_ids(0, action);
  return kActions[action];
}

double synth_action_period(int action) {
  check_ids(0, action);
  return kPeriods[action];
}

SynthPose synth_pose(int action, double t, double phase, int resolution) {
  check_ids(0, action);
  const double c = resolution / 2.0;
  const double u = kTwoPi * t / kPeriods[action] + phase;
  SynthPose p{c, c, 1.0, 1.0, 0.0};
  switch (static_cast<SynthAction>(action)) {
    case SynthAction::Pulsate:
      p.sx = p.sy = 1.0 + 0.3 * std::sin(u);
      break;
    case SynthAction::TranslateBounce: {
      const double tri = triangle_wave(u / kTwoPi);
      p.cx = c + 0.12 * resolution * tri;
      p.sx = p.sy = 1.0 + 0.15 * tri;
      break;
    }
    case SynthAction::Rotate: {
      const double breathe = 1.0 + 0.15 * std::sin(2.0 * u);
      p.sx = 1.25 * breathe;
      p.sy = 0.8 * breathe;
      p.theta = u;
      break;
    }
    case SynthAction::Wave:
      p.cy = c + 0.12 * resolution * std::sin(u);
      p.sx = 1.0 + 0.25 * std::cos(u);
      break;
  }
  return p;
}

LandmarkPolygon synth_polygon(int actor, int action, double t, double phase, int resolution) {
  check_ids(actor, action);
  const ActorLook& look = kActors[actor];
  const SynthPose p = synth_pose(action, t, phase, resolution);
  const double r = kBaseRadius * resolution * equal_area_radius(look.sides);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  LandmarkPolygon poly;
  poly.points.reserve(look.sides);
  for (int i = 0; i < look.sides; ++i) {
    const double a = kTwoPi * i / look.sides - std::numbers::pi / 2.0;
    const double lx = r * std::cos(a) * p.sx;
    const double ly = r * std::sin(a) * p.sy;
    poly.points.push_back({p.cx + ct * lx - st * ly, p.cy + st * lx + ct * ly});
  }
  return poly;
}

std::pair<Frame, LandmarkPolygon> render_synth_frame(int actor, int action, double t, double phase,
                                                     const SynthSpec& spec) {
  check_ids(actor, action);
  if (actor >= spec.n_actors || action >= spec.n_actions) throw LookupError("label outside the corpus vocabulary");
  const int res = spec.resolution;
  LandmarkPolygon poly = synth_polygon(actor, action, t, phase, res);
  std::vector<float> cov(static_cast<std::size_t>(res) * res);
  kernels::rasterize_coverage(poly.points, res, res, spec.supersample, cov);
  const ActorLook& look = kActors[actor];
  const float color[3] = {look.r, look.g, look.b};
  auto pixels = torch::empty({3, res, res});
  float* dst = pixels.data_ptr<float>();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < cov.size(); ++i) {
      dst[c * cov.size() + i] = -1.0f + cov[i] * (color[c] + 1.0f);
    }
  }
  return {Frame{pixels, t}, std::move(poly)};
}

VideoClip render_synth_clip(int actor, int action, int length, double phase, const SynthSpec& spec) {
  VideoClip clip;
  clip.label = ConditionLabel{actor, action};
  std::vector<torch::Tensor> frames;
  for (int i = 0; i < length; ++i) {
    const double t = i / spec.fps;
    auto [frame, poly] = render_synth_frame(actor, action, t, phase, spec);
    frames.push_back(frame.pixels);
    clip.timepoints.push_back(t);
    clip.landmarks.push_back(std::move(poly));
  }
  clip.frames = length > 0 ? torch::stack(frames) : torch::zeros({0, 3, spec.resolution, spec.resolution});
  return clip;
}

std::vector<CorpusEntry> CorpusIndex::split(const std::string& name) const {
  std::vector<CorpusEntry> out;
  for (const auto& e : clips) {
    if (e.split == name) out.push_back(e);
  }
  return out;
}

std::string clip_path(const std::string& root, const CorpusEntry& e) {
  return (fs::path(root) / e.split / e.name).string();
}

void write_clip(const VideoClip& clip, const std::string& dir) {
  clip.validate();
  fs::create_directories(dir);
  for (int64_t i = 0; i < clip.length(); ++i) {
    write_png((fs::path(dir) / frame_name(i)).string(), clip.frames[i]);
  }
  Json meta{{"timepoints", clip.timepoints}};
  if (clip.label) meta["label"] = {{"actor", clip.label->actor_id}, {"action", clip.label->action_id}};
  if (!clip.landmarks.empty()) {
    Json lm = Json::array();
    for (const auto& poly : clip.landmarks) {
      Json pts = Json::array();
      for (const auto& p : poly.points) pts.push_back({p.x, p.y});
      lm.push_back(std::move(pts));
    }
    meta["landmarks"] = std::move(lm);
  }
  write_json_file_atomic((fs::path(dir) / "meta.json").string(), meta);
}

VideoClip load_frames_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  static const std::regex pattern("frame_(\\d{5})\\.png");
  std::vector<std::pair<int64_t, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoll(m[1].str()), entry.path());
  }
  if (files.empty()) throw IoError(dir + " contains no frame_%05d.png files");
  std::sort(files.begin(), files.end());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (files[i].first != static_cast<int64_t>(i)) {
      throw IoError(dir + ": missing frame " + frame_name(static_cast<int64_t>(i)));
    }
  }
  VideoClip clip;
  std::vector<torch::Tensor> frames;
  for (const auto& [idx, path] : files) frames.push_back(read_png(path.string()));
  for (const auto& f : frames) {
    if (f.sizes() != frames.front().sizes()) throw IoError(dir + ": frames differ in size");
  }
  clip.frames = torch::stack(frames);

  const fs::path meta_path = fs::path(dir) / "meta.json";
  if (fs::exists(meta_path)) {
    Json meta = read_json_file(meta_path.string());
    try {
      clip.timepoints = meta.at("timepoints").get<std::vector<double>>();
      if (meta.contains("label")) {
        clip.label = ConditionLabel{meta["label"].at("actor").get<int>(), meta["label"].at("action").get<int>()};
      }
      if (meta.contains("landmarks")) {
        for (const auto& poly : meta["landmarks"]) {
          LandmarkPolygon p;
          for (const auto& pt : poly) p.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
          clip.landmarks.push_back(std::move(p));
        }
      }
    } catch (const Json::exception& e) {
      throw IoError(meta_path.string() + ": " + e.what());
    }
  } else {
    for (std::size_t i = 0; i < files.size(); ++i) clip.timepoints.push_back(static_cast<double>(i));
  }
  try {
    clip.validate();
  } catch (const std::exception& e) {
    throw IoError(dir + ": " + e.what());
  }
  return clip;
}

CorpusIndex build_dataset(const SynthSpec& spec, const std::string& root) {
  spec.validate();
  CorpusIndex index{spec, spec.vocabulary(), {}};
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> length_dist(spec.min_length, spec.max_length);
  std::uniform_real_distribution<double> phase_dist(0.0, spec.phase_spread);
  for (int a = 0; a < spec.n_actors; ++a) {
    for (int b = 0; b < spec.n_actions; ++b) {
      for (int i = 0; i < spec.clips_per_cell; ++i) {
        CorpusEntry e;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s_%s_%03d", kActors[a].name, kActions[b], i);
        e.name = buf;
        e.split = spec.is_holdout(a, b) ? "test" : "train";
        e.actor = a;
        e.action = b;
        e.length = length_dist(rng);
        e.phase = phase_dist(rng);
        index.clips.push_back(e);
      }
    }
  }
  for (const auto& e : index.clips) {
    write_clip(render_synth_clip(e.actor, e.action, e.length, e.phase, spec), clip_path(root, e));
  }
  Json clips = Json::array();
  for (const auto& e : index.clips) {
    clips.push_back({{"name", e.name}, {"split", e.split}, {"actor", e.actor}, {"action", e.action},
                     {"length", e.length}, {"phase", e.phase}});
  }
  write_json_file_atomic((fs::path(root) / "index.json").string(),
                         Json{{"schema_version", 1}, {"spec", to_json(spec)},
                              {"vocabulary", to_json(index.vocabulary)}, {"clips", clips}});
  return index;
}

CorpusIndex load_index(const std::string& root) {
  Json j = read_json_file((fs::path(root) / "index.json").string());
  CorpusIndex index;
  try {
    index.spec = synth_spec_from_json(j.at("spec"));
    index.vocabulary = vocabulary_from_json(j.at("vocabulary"));
    for (const auto& c : j.at("clips")) {
      index.clips.push_back(CorpusEntry{c.at("name"), c.at("split"), c.at("actor"), c.at("action"),
                                        c.at("length"), c.at("phase")});
    }
  } catch (const Json::exception& e) {
    throw IoError(root + "/index.json: " + e.what());
  }
  return index;
}

std::vector<VideoClip> load_split(const std::string& root, const std::string& split) {
  const CorpusIndex index = load_index(root);
  std::vector<VideoClip> out;
  for (const auto& e : index.split(split)) {
    VideoClip clip = load_frames_dir(clip_path(root, e));
    if (!clip.label) clip.label = ConditionLabel{e.actor, e.action};
    out.push_back(std::move(clip));
  }
  return out;
}

std::vector<std::string> find_clip_dirs(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root);
  std::vector<std::string> out;
  if (fs::exists(fs::path(root) / "frame_00000.png")) out.push_back(root);
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "frame_00000.png")) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VideoClip> load_clip_tree(const std::string& root) {
  const auto dirs = find_clip_dirs(root);
  if (dirs.empty()) throw IoError("no clip directories under " + root);
  std::vector<VideoClip> out;
  for (const auto& d : dirs) out.push_back(load_frames_dir(d));
  return out;
}

}  // namespace tempostyle
