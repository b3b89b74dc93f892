#pragma once

#include <torch/torch.h>

#include <span>
#include <vector>

#include "tempostyle/layers.hpp"

namespace tempostyle {

/// Trainable temporal basis: one linear term (index 0) plus k-1 sines.
struct Time2VecParams {
  std::vector<double> omega;  // radians per frame
  std::vector<double> phi;    // radians

  std::size_t k() const { return omega.size(); }
  /// Throws ConfigError unless len(omega) == len(phi) >= 2 and all entries are finite.
  void validate() const;
};

/// Amplitudes of the temporal basis for one whole clip.
struct MotionStyle {
  std::vector<double> m;
};

/// Input noise of the motion mapper, one draw per clip.
struct MotionNoise {
  std::vector<double> z;
};

/// Per-frame temporal style w_t = m * v(t).
struct TemporalStyle {
  std::vector<double> w;
  double t = 0.0;
};

/// Log-spaced angular frequencies with periods from 2 frames to 4 * max_clip_len,
/// omega[0] = 1 / max_clip_len, so the linear term spans [0, 1] over a clip. Phases start at zero.
Time2VecParams init_time2vec(int k, int max_clip_len);

/// v(t): out[0] = omega[0]*t + phi[0], out[j] = sin(omega[j]*t + phi[j]).
/// Throws DomainError for non-finite t.
std::vector<double> time2vec_eval(const Time2VecParams& params, double t);

/// Analytic partial derivatives of v_j(t). Each v_j depends only on omega[j],
/// phi[j] and t, so the Jacobian is diagonal in (omega, phi).
struct Time2VecJacobian {
  std::vector<double> d_omega;
  std::vector<double> d_phi;
  std::vector<double> d_t;
};
Time2VecJacobian time2vec_jacobian(const Time2VecParams& params, double t);

TemporalStyle temporal_style(const MotionStyle& m, const Time2VecParams& params, double t);

/// One temporal style per time-point, all sharing m. Time-points may be fractional.
std::vector<TemporalStyle> trajectory(const MotionStyle& m, const Time2VecParams& params,
                                      std::span<const double> timepoints);

/// Differentiable time2vec module. Parameters `omega` and `phi`.
class Time2VecImpl : public torch::nn::Module {
 public:
  explicit Time2VecImpl(const Time2VecParams& init);

  /// times: any shape; returns times.shape + [k].
  torch::Tensor forward(const torch::Tensor& times);

  Time2VecParams snapshot() const;
  int64_t k() const { return omega.size(0); }

  torch::Tensor omega;
  torch::Tensor phi;
};
TORCH_MODULE(Time2Vec);

/// F_t: four affine layers with leaky rectifiers between them, z (d_z) -> m (k).
class MotionMapperImpl : public torch::nn::Module {
 public:
  MotionMapperImpl(int64_t z_dim, int64_t hidden, int64_t k, double lr_mul);

  torch::Tensor forward(const torch::Tensor& z);
  MotionStyle map(const MotionNoise& z);

  int64_t z_dim() const { return z_dim_; }

  std::vector<EqLinear> layers;

 private:
  int64_t z_dim_;
};
TORCH_MODULE(MotionMapper);

/// Batched temporal styles: m [B, k] and basis values v [B, n, k] -> [B, n, k].
torch::Tensor temporal_styles(const torch::Tensor& m, const torch::Tensor& basis);

}  // namespace tempostyle
