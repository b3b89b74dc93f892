#include "tempostyle/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "tempostyle/errors.hpp"

namespace tempostyle {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'C', 'K', 'P', 'T', '0', '1'};

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kInt64: return "i64";
    case torch::kUInt8: return "u8";
    default: throw ConfigError("checkpoint: unsupported tensor dtype");
  }
}

torch::ScalarType dtype_from_name(const std::string& s) {
  if (s == "f32") return torch::kFloat32;
  if (s == "f64") return torch::kFloat64;
  if (s == "i64") return torch::kInt64;
  if (s == "u8") return torch::kUInt8;
  throw IoError("checkpoint: unknown dtype " + s);
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

}  // namespace

const torch::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

const torch::Tensor& Checkpoint::at(const std::string& name) const {
  const auto* t = find(name);
  if (!t) throw LookupError("checkpoint has no tensor named " + name);
  return *t;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Json entries = Json::array();
  std::string payload;
  for (const auto& [name, tensor] : ckpt.tensors) {
    auto c = tensor.detach().cpu().contiguous();
    Json e{{"name", name},
           {"dtype", dtype_name(c.scalar_type())},
           {"shape", c.sizes().vec()},
           {"offset", payload.size()},
           {"nbytes", c.nbytes()}};
    payload.append(static_cast<const char*>(c.data_ptr()), c.nbytes());
    entries.push_back(std::move(e));
  }
  const std::string header = Json{{"manifest", ckpt.manifest}, {"tensors", entries}}.dump();

  std::string bytes(kMagic, sizeof kMagic);
  put_u64(bytes, header.size());
  bytes += header;
  bytes += payload;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw IoError(path + " is not a checkpoint file");
  }
  const uint64_t header_len = get_u64(bytes.data() + 8);
  if (16 + header_len > bytes.size()) throw IoError(path + ": truncated header");
  Json header;
  try {
    header = Json::parse(bytes.substr(16, header_len));
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": corrupt header: " + e.what());
  }
  const std::size_t base = 16 + header_len;
  Checkpoint ckpt;
  ckpt.manifest = header.at("manifest");
  for (const auto& e : header.at("tensors")) {
    const auto offset = e.at("offset").get<std::size_t>();
    const auto nbytes = e.at("nbytes").get<std::size_t>();
    if (base + offset + nbytes > bytes.size()) throw IoError(path + ": truncated tensor data");
    auto shape = e.at("shape").get<std::vector<int64_t>>();
    auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_name(e.at("dtype"))));
    if (static_cast<std::size_t>(t.nbytes()) != nbytes) throw IoError(path + ": size mismatch");
    std::memcpy(t.data_ptr(), bytes.data() + base + offset, nbytes);
    ckpt.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
  }
  return ckpt;
}

void add_model_tensors(Checkpoint& ckpt, const torch::nn::Module& model) {
  for (const auto& item : model.named_parameters(true)) {
    ckpt.tensors.emplace_back(item.key(), item.value().detach().clone());
  }
}

void restore_model_tensors(torch::nn::Module& model, const Checkpoint& ckpt) {
  torch::NoGradGuard guard;
  for (auto& item : model.named_parameters(true)) {
    const auto& src = ckpt.at(item.key());
    if (src.sizes() != item.value().sizes()) {
      throw ShapeError("checkpoint tensor " + item.key() + " has a different shape");
    }
    item.value().copy_(src);
  }
}

VideoGAN model_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.manifest.contains("model")) throw LookupError("checkpoint manifest lacks a model config");
  VideoGAN model(model_config_from_json(ckpt.manifest.at("model")));
  restore_model_tensors(*model, ckpt);
  return model;
}

Json to_json(const LabelVocabulary& v) { return Json{{"actors", v.actors}, {"actions", v.actions}}; }

LabelVocabulary vocabulary_from_json(const Json& j) {
  LabelVocabulary v;
  v.actors = j.at("actors").get<std::vector<std::string>>();
  v.actions = j.at("actions").get<std::vector<std::string>>();
  return v;
}

}  // namespace tempostyle
