#pragma once

// Tensor files: one UTF-8 JSON header line
//   {"shape":[...],"dtype":"f32","order":"row-major"}
// then the raw little-endian IEEE-754 payload.

#include "faithful/types.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace faithful {

enum class DType { F32, F64 };

struct Tensor {
  std::vector<int> shape;
  Eigen::ArrayXd data;  // row-major order
  DType dtype = DType::F32;

  std::size_t element_count() const;
};

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);
/// Reads only the header; payload is skipped.
Tensor load_tensor_header(const std::filesystem::path& path);

/// (T, h, w) tensor of per-frame masks.
Tensor masks_to_tensor(std::span<const SpatialMask> masks);
std::vector<SpatialMask> tensor_to_masks(const Tensor& t);

void save_spatial_masks(const std::filesystem::path& path, std::span<const SpatialMask> masks);
std::vector<SpatialMask> load_spatial_masks(const std::filesystem::path& path);
void save_temporal_weights(const std::filesystem::path& path, const TemporalWeights& w);
TemporalWeights load_temporal_weights(const std::filesystem::path& path, bool normalized);

/// Writes to a sibling temporary file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace faithful
