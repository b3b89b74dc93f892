#include "tempostyle/temporal_embedding.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tempostyle/errors.hpp"

namespace tempostyle {

void Time2VecParams::validate() const {
  if (omega.size() != phi.size()) {
    throw ConfigError("time2vec: omega has " + std::to_string(omega.size()) + " entries, phi has " +
                      std::to_string(phi.size()));
  }
  if (omega.size() < 2) throw ConfigError("time2vec: k must be at least 2");
  for (std::size_t j = 0; j < omega.size(); ++j) {
    if (!std::isfinite(omega[j]) || !std::isfinite(phi[j])) {
      throw ConfigError("time2vec: non-finite parameter at index " + std::to_string(j));
    }
  }
}

Time2VecParams init_time2vec(int k, int max_clip_len) {
  if (k < 2) throw ConfigError("time2vec: k must be at least 2");
  if (max_clip_len < 1) throw ConfigError("time2vec: max_clip_len must be positive");
  Time2VecParams p;
  p.omega.assign(k, 0.0);
  p.phi.assign(k, 0.0);
  p.omega[0] = 1.0 / max_clip_len;
  const double shortest = 2.0;
  const double longest = 4.0 * max_clip_len;
  const int n = k - 1;
  for (int j = 1; j <= n; ++j) {
    // j = 1 is the slowest basis.
    const double frac = n == 1 ? 0.0 : static_cast<double>(j - 1) / (n - 1);
    const double period = longest * std::pow(shortest / longest, frac);
    p.omega[j] = 2.0 * std::numbers::pi / period;
  }
  return p;
}

std::vector<double> time2vec_eval(const Time2VecParams& params, double t) {
  if (!std::isfinite(t)) throw DomainError("time2vec: time-point must be finite");
  const std::size_t k = params.k();
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double arg = params.omega[j] * t + params.phi[j];
    out[j] = j == 0 ? arg : std::sin(arg);
  }
  return out;
}

Time2VecJacobian time2vec_jacobian(const Time2VecParams& params, double t) {
  if (!std::isfinite(t)) throw DomainError("time2vec: time-point must be finite");
  const std::size_t k = params.k();
  Time2VecJacobian jac{std::vector<double>(k), std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t j = 0; j < k; ++j) {
    const double outer = j == 0 ? 1.0 : std::cos(params.omega[j] * t + params.phi[j]);
    jac.d_omega[j] = outer * t;
    jac.d_phi[j] = outer;
    jac.d_t[j] = outer * params.omega[j];
  }
  return jac;
}

TemporalStyle temporal_style(const MotionStyle& m, const Time2VecParams& params, double t) {
  if (m.m.size() != params.k()) {
    throw ConfigError("temporal_style: motion style has " + std::to_string(m.m.size()) +
                      " entries but the basis has " + std::to_string(params.k()));
  }
  TemporalStyle out{time2vec_eval(params, t), t};
  for (std::size_t j = 0; j < out.w.size(); ++j) out.w[j] *= m.m[j];
  return out;
}

std::vector<TemporalStyle> trajectory(const MotionStyle& m, const Time2VecParams& params,
                                      std::span<const double> timepoints) {
  std::vector<TemporalStyle> out;
  out.reserve(timepoints.size());
  for (double t : timepoints) out.push_back(temporal_style(m, params, t));
  return out;
}

Time2VecImpl::Time2VecImpl(const Time2VecParams& init) {
  init.validate();
  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  omega = register_parameter(
      "omega", torch::tensor(init.omega, opts).to(torch::kFloat32));
  phi = register_parameter("phi", torch::tensor(init.phi, opts).to(torch::kFloat32));
}

torch::Tensor Time2VecImpl::forward(const torch::Tensor& times) {
  auto arg = times.unsqueeze(-1).to(omega.dtype()) * omega + phi;
  auto linear = arg.narrow(-1, 0, 1);
  auto periodic = torch::sin(arg.narrow(-1, 1, arg.size(-1) - 1));
  return torch::cat({linear, periodic}, -1);
}

Time2VecParams Time2VecImpl::snapshot() const {
  auto o = omega.detach().to(torch::kFloat64).contiguous();
  auto p = phi.detach().to(torch::kFloat64).contiguous();
  Time2VecParams out;
  out.omega.assign(o.data_ptr<double>(), o.data_ptr<double>() + o.numel());
  out.phi.assign(p.data_ptr<double>(), p.data_ptr<double>() + p.numel());
  return out;
}

MotionMapperImpl::MotionMapperImpl(int64_t z_dim, int64_t hidden, int64_t k, double lr_mul)
    : z_dim_(z_dim) {
  const int64_t dims[5] = {z_dim, hidden, hidden, hidden, k};
  for (int i = 0; i < 4; ++i) {
    layers.push_back(register_module("layer" + std::to_string(i),
                                     EqLinear(dims[i], dims[i + 1], true, 0.0, lr_mul)));
  }
}

torch::Tensor MotionMapperImpl::forward(const torch::Tensor& z) {
  if (z.size(-1) != z_dim_) {
    throw ConfigError("motion mapper: expected z of dimension " + std::to_string(z_dim_) +
                      ", got " + std::to_string(z.size(-1)));
  }
  auto x = z;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i]->forward(x);
    if (i + 1 < layers.size()) x = lrelu(x);
  }
  return x;
}

MotionStyle MotionMapperImpl::map(const MotionNoise& z) {
  torch::NoGradGuard guard;
  auto dtype = layers.front()->weight.scalar_type();
  auto zt = torch::tensor(z.z, torch::kFloat64).to(dtype).unsqueeze(0);
  auto m = forward(zt).squeeze(0).to(torch::kFloat64).contiguous();
  return MotionStyle{std::vector<double>(m.data_ptr<double>(), m.data_ptr<double>() + m.numel())};
}

torch::Tensor temporal_styles(const torch::Tensor& m, const torch::Tensor& basis) {
  if (m.size(-1) != basis.size(-1)) {
    throw ConfigError("temporal_styles: motion style and basis dimensions differ");
  }
  return m.unsqueeze(1) * basis;
}

}  // namespace tempostyle
