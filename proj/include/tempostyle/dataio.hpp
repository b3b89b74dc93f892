#pragma once

#include <torch/torch.h>

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tempostyle/checkpoint.hpp"
#include "tempostyle/json_util.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

/// Motion programs of the synthetic corpus.
enum class SynthAction { Pulsate = 0, TranslateBounce = 1, Rotate = 2, Wave = 3 };

inline constexpr int kMaxSynthActors = 8;
inline constexpr int kNumSynthActions = 4;

/// Desk-scale stand-in corpus: actors are colored regular polygons, actions are
/// periodic motion programs with a random phase per clip.
struct SynthSpec {
  int n_actors = 4;
  int n_actions = 4;
  int clips_per_cell = 8;
  int min_length = 64;
  int max_length = 96;
  int resolution = 32;
  double fps = 1.0;
  int supersample = 8;
  uint64_t seed = 0;
  /// Clip phases are drawn uniformly from [0, phase_spread) radians. 2 pi makes the
  /// per-frame distribution identical at every time-point.
  double phase_spread = 1.5707963267948966;
  /// (actor, action) cells excluded from the training split.
  std::vector<std::pair<int, int>> holdout{{0, 1}, {1, 2}, {2, 3}, {3, 0}};

  void validate() const;
  LabelVocabulary vocabulary() const;
  bool is_holdout(int actor, int action) const;
};

Json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const Json& j);

const char* synth_actor_name(int actor);
const char* synth_action_name(int action);
/// Period in frames of each motion program.
double synth_action_period(int action);

/// Placement of the actor polygon at one time-point.
struct SynthPose {
  double cx, cy;    // center, pixels
  double sx, sy;    // anisotropic scale in the polygon frame
  double theta;     // rotation, radians
};
SynthPose synth_pose(int action, double t, double phase, int resolution);

/// Analytic outline of actor `actor` under `action` at time t.
LandmarkPolygon synth_polygon(int actor, int action, double t, double phase, int resolution);

/// Deterministic closed-form renderer: anti-aliased polygon over a black background.
/// Throws LookupError for ids out of range.
std::pair<Frame, LandmarkPolygon> render_synth_frame(int actor, int action, double t, double phase,
                                                     const SynthSpec& spec);

/// Renders a full clip of `length` frames with time-points i / fps.
VideoClip render_synth_clip(int actor, int action, int length, double phase, const SynthSpec& spec);

struct CorpusEntry {
  std::string name;   // <actor>_<action>_<idx>
  std::string split;  // "train" | "test"
  int actor = 0;
  int action = 0;
  int length = 0;
  double phase = 0.0;
};

struct CorpusIndex {
  SynthSpec spec;
  LabelVocabulary vocabulary;
  std::vector<CorpusEntry> clips;

  std::vector<CorpusEntry> split(const std::string& name) const;
};

/// Writes <root>/<split>/<actor>_<action>_<idx>/frame_%05d.png + meta.json and a
/// global <root>/index.json. Byte-identical for identical specs.
CorpusIndex build_dataset(const SynthSpec& spec, const std::string& root);
CorpusIndex load_index(const std::string& root);
std::string clip_path(const std::string& root, const CorpusEntry& e);

/// Writes frames as frame_%05d.png and meta.json {timepoints, label?, landmarks?}.
void write_clip(const VideoClip& clip, const std::string& dir);
/// Loads a frame directory. Without meta.json time-points default to 0, 1, 2, ...
/// Throws IoError for empty directories, gaps in frame numbering, a time-point count
/// that disagrees with the frames, or non-increasing time-points.
VideoClip load_frames_dir(const std::string& dir);

/// Loads every clip of a split into memory.
std::vector<VideoClip> load_split(const std::string& root, const std::string& split);

/// Every directory under root (root included) holding frame_00000.png, sorted by path.
std::vector<std::string> find_clip_dirs(const std::string& root);
/// Loads all clips found by find_clip_dirs. Throws IoError when there are none.
std::vector<VideoClip> load_clip_tree(const std::string& root);

}  // namespace tempostyle
