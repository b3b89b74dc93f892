#pragma once

#include <torch/torch.h>

// c10 logging defines its own CHECK.
#undef CHECK
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "tempostyle/dataio.hpp"
#include "tempostyle/model.hpp"
#include "tempostyle/training.hpp"

namespace testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tempostyle_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return (path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

inline tempostyle::ModelConfig tiny_model() {
  tempostyle::ModelConfig c;
  c.resolution = 16;
  c.g_channels = {{4, 16}, {8, 16}, {16, 8}};
  c.d_channels = {8, 16, 16, 16};
  c.k = 8;
  c.z_dim = 16;
  c.mapper_hidden = 32;
  c.c_dim = 32;
  c.embed_dim = 16;
  c.max_clip_len = 12;
  c.dt_feat_dim = 8;
  c.dt_time_k = 8;
  return c;
}

inline tempostyle::SynthSpec tiny_corpus() {
  tempostyle::SynthSpec s;
  s.clips_per_cell = 1;
  s.min_length = 8;
  s.max_length = 12;
  s.resolution = 16;
  s.supersample = 4;
  return s;
}

inline tempostyle::TrainConfig tiny_train(const std::string& dataset) {
  tempostyle::TrainConfig t;
  t.dataset = dataset;
  t.batch_size = 4;
  t.total_iters = 20;
  t.ramp = {5, 10};
  t.log_every = 1;
  t.checkpoint_every = 1000;
  t.model = tiny_model();
  return t;
}

inline bool bitwise_equal(const torch::Tensor& a, const torch::Tensor& b) {
  return a.sizes() == b.sizes() && a.scalar_type() == b.scalar_type() && torch::equal(a, b);
}

}  // namespace testing
