#pragma once

#include <torch/torch.h>

#include <string>
#include <utility>
#include <vector>

#include "tempostyle/json_util.hpp"
#include "tempostyle/model.hpp"

namespace tempostyle {

/// Named tensors plus a JSON manifest (model config, train config, label vocabulary,
/// iteration counter, optimizer step counts).
///
/// On disk: the 8-byte magic "TSCKPT01", a little-endian u64 header length, the compact
/// JSON header {"manifest": ..., "tensors": [{"name","dtype","shape","offset","nbytes"}]},
/// then the raw tensor bytes in header order. Writing is deterministic, so
/// save -> load -> save reproduces the file byte for byte.
struct Checkpoint {
  Json manifest = Json::object();
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  const torch::Tensor* find(const std::string& name) const;
  const torch::Tensor& at(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Appends every named model parameter (names like "g.block8.conv0.weight").
void add_model_tensors(Checkpoint& ckpt, const torch::nn::Module& model);
/// Copies tensors into the model's parameters. Every model parameter must be present
/// with a matching shape; throws LookupError / ShapeError otherwise.
void restore_model_tensors(torch::nn::Module& model, const Checkpoint& ckpt);

/// Rebuilds a model from a checkpoint's manifest["model"] and its tensors.
VideoGAN model_from_checkpoint(const Checkpoint& ckpt);

/// Label vocabulary stored in checkpoints and corpus indices.
struct LabelVocabulary {
  std::vector<std::string> actors;
  std::vector<std::string> actions;
};
Json to_json(const LabelVocabulary& v);
LabelVocabulary vocabulary_from_json(const Json& j);

}  // namespace tempostyle
