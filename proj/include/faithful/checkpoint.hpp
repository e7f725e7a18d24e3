#pragma once

// Checkpoint file: a JSON header line {"format", "version", "spec", "seed",
// "parameters": [{"name", "shape"}], "meta"} followed by one f64 tensor
// record per parameter, in header order.

#include "faithful/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>

namespace faithful {

struct Checkpoint {
  Model model;
  std::uint64_t seed = 0;
  nlohmann::json meta;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t seed,
                     const nlohmann::json& meta = nlohmann::json::object());

/// Rebuilds the network from the stored spec and restores every parameter.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace faithful
