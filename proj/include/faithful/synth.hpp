#pragma once

#include "faithful/dataset.hpp"
#include "faithful/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faithful {

enum class EvidenceMode {
  Global,        // gray-world holds over every frame
  SpatialPatch,  // only an achromatic patch reveals the cast
  KeyFrame       // only one frame is gray-balanced
};

std::string_view to_string(EvidenceMode m);
EvidenceMode parse_evidence_mode(std::string_view s);

struct SynthConfig {
  int numSequences = 16;
  int frames = 5;
  int height = 32;
  int width = 32;
  EvidenceMode mode = EvidenceMode::Global;
  int patchSize = 8;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

struct PatchLocation {
  int y = 0;
  int x = 0;
  int size = 0;
  friend bool operator==(const PatchLocation&, const PatchLocation&) = default;
};

/// Where the recoverable evidence was planted in one sequence.
struct Evidence {
  std::string id;
  EvidenceMode mode = EvidenceMode::Global;
  Eigen::Vector3d illuminant = Eigen::Vector3d::Zero();
  std::optional<PatchLocation> patch;
  std::optional<int> keyFrame;
};

void to_json(nlohmann::json& j, const Evidence& e);
void from_json(const nlohmann::json& j, Evidence& e);

struct SynthDataset {
  std::vector<FrameSequence> sequences;
  std::vector<Evidence> evidence;
};

SynthDataset synth_generate(const SynthConfig& config, std::uint64_t seed);

/// Writes the dataset layout plus evidence.json and manifest.json; returns the manifest.
DatasetManifest write_synth(const SynthDataset& data, const std::filesystem::path& root);

inline constexpr const char* kEvidenceFile = "evidence.json";

/// Per-channel mean of `frame` over the pixels where `include` is true
/// (all pixels when empty), unit-normalized.
Eigen::Vector3d gray_world(const Image& frame, const Eigen::Matrix<bool, -1, -1>& include = {});

}  // namespace faithful
