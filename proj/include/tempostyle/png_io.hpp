#pragma once

#include <torch/torch.h>

#include <string>

namespace tempostyle {

/// Writes [3, H, W] values in [-1, 1] as an 8-bit RGB PNG (round to nearest level).
void write_png(const std::string& path, const torch::Tensor& image);
/// Reads an 8-bit RGB or RGBA PNG into [3, H, W] float32 in [-1, 1].
torch::Tensor read_png(const std::string& path);

}  // namespace tempostyle
