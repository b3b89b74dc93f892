#pragma once

#include <torch/torch.h>

#include <optional>
#include <string>
#include <vector>

#include "tempostyle/checkpoint.hpp"
#include "tempostyle/conditional_content.hpp"
#include "tempostyle/model.hpp"
#include "tempostyle/perceptual.hpp"
#include "tempostyle/temporal_embedding.hpp"
#include "tempostyle/video.hpp"

namespace tempostyle {

struct InversionConfig {
  int64_t steps = 500;
  double lr = 1e-2;
  PerceptualWeights weights;
  int64_t max_frames = 32;  // the first max_frames frames of the clip are fitted
  int restarts = 3;         // random starts m = F_t(z) besides the zero start
  int64_t restart_steps = 100;
  uint64_t seed = 0;
  double lambda = 1.0;
  std::optional<std::vector<double>> init_m;  // single explicit start, no restarts

  void validate() const;
};

struct InversionResult {
  MotionStyle m_star;
  std::vector<double> trace;  // loss of the chosen start at every step, trace[0] = initial
  double initial_loss = 0.0;  // loss of the first start before any step
  double best_loss = 0.0;
  int64_t best_step = 0;
  int chosen_start = 0;       // 0 = zero (or explicit) start, 1.. = random restarts
};

/// Fits the motion style m to the clip's frames through the frozen generator. Only m is
/// optimized; model weights and their gradients are not touched. Returns the best iterate.
InversionResult invert_motion(VideoGAN& model, const VideoClip& clip, const ConditionLabel& label,
                              const InversionConfig& cfg, const PerceptualDistance& dist);

struct TuneConfig {
  int64_t steps = 200;
  double lr = 3e-4;
  PerceptualWeights weights;
  int64_t max_frames = 32;
  double divergence_factor = 10.0;
  double lambda = 1.0;

  void validate() const;
};

struct TuneResult {
  VideoGAN model{nullptr};
  std::vector<double> trace;
  double loss_before = 0.0;
  double loss_after = 0.0;
  double mse_before = 0.0;  // mean per-frame pixel mse
  double mse_after = 0.0;
  bool diverged = false;  // true: the returned model is an untouched copy
};

/// Fine-tunes the synthesis network (g.*) of a copy of the model with m_star frozen.
/// Keeps the best iterate, so loss_after <= loss_before.
TuneResult pivotal_tune(const VideoGAN& model, const MotionStyle& m_star, const VideoClip& clip,
                        const ConditionLabel& label, const TuneConfig& cfg,
                        const PerceptualDistance& dist);

/// Renders m_star under another content label.
VideoClip transfer_motion(VideoGAN& model, const MotionStyle& m_star, const ConditionLabel& label,
                          const std::vector<double>& timepoints, double lambda = 1.0);

/// Fits a free temporal style w_t [k] to every frame separately (content fixed by the
/// label), warm-starting each frame from the previous solution. Returns [T, k].
torch::Tensor invert_frame_styles(VideoGAN& model, const VideoClip& clip, const ConditionLabel& label,
                                  int64_t steps_per_frame, double lr, const PerceptualDistance& dist,
                                  double lambda = 1.0);

/// m_star.json: {"m": [...], "k", "config_hash", "label": {"actor", "action"}, "loss"}.
struct MotionStyleFile {
  MotionStyle m;
  std::string config_hash;
  std::optional<ConditionLabel> label;
  double loss = 0.0;
};
void write_motion_style(const std::string& path, const MotionStyleFile& f);
MotionStyleFile read_motion_style(const std::string& path);

/// Hash identifying the architecture a motion style belongs to.
std::string model_config_hash(const ModelConfig& cfg);

}  // namespace tempostyle
