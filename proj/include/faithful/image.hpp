#pragma once

#include "faithful/tensor_io.hpp"
#include "faithful/types.hpp"

#include <filesystem>

namespace faithful {

/// Decodes an 8-bit PNG to RGB in [0, 1]; alpha is dropped, gray expanded.
Image read_png(const std::filesystem::path& path);

/// Encodes an RGB image as 8-bit PNG (values clamped to [0, 1], rounded).
void write_png(const std::filesystem::path& path, const Image& image);

/// (height, width) of a PNG without decoding its pixels.
std::pair<int, int> png_size(const std::filesystem::path& path);

/// (H, W, 3) row-major tensor <-> planar image.
Tensor image_to_tensor(const Image& image, DType dtype = DType::F32);
Image tensor_to_image(const Tensor& t);

/// Reads a frame stored as .png or as an (H, W, 3) tensor file.
Image read_frame(const std::filesystem::path& path);

}  // namespace faithful
