#pragma once

// On-disk layout: <root>/<sequence id>/ holds the frames (*.png or *.tensor,
// ordered by file name) and groundtruth.json {"illuminant": [r, g, b]}.
// <root>/manifest.json, when present, carries fold assignments.

#include "faithful/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace faithful {

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<std::string> ids;                 // sorted
  std::map<std::string, int> frameCounts;
  std::map<std::string, int> folds;             // empty until split
  int foldCount = 0;

  /// Ids assigned to `fold`, in id order.
  std::vector<std::string> fold_ids(int fold) const;
  /// Ids in every fold except `fold`.
  std::vector<std::string> train_ids(int fold) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

struct LoadError {
  std::string id;
  std::string message;
};

struct DatasetLoad {
  DatasetManifest manifest;
  std::vector<LoadError> errors;  // rejected sequences, excluded from the manifest
};

inline constexpr const char* kGroundTruthFile = "groundtruth.json";
inline constexpr const char* kManifestFile = "manifest.json";

/// Scans and validates every sequence directory under root. Frames are not
/// decoded here; fold assignments are restored from manifest.json if present.
DatasetLoad load_dataset(const std::filesystem::path& root);

/// Decodes one sequence's frames and ground truth.
FrameSequence load_sequence(const DatasetManifest& manifest, const std::string& id);

std::vector<FrameSequence> load_sequences(const DatasetManifest& manifest,
                                          const std::vector<std::string>& ids);

/// Writes frames as f32 tensor files plus the ground-truth record.
void save_sequence(const std::filesystem::path& root, const FrameSequence& seq);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Random partition into k folds whose sizes differ by at most one.
DatasetManifest kfold_split(DatasetManifest manifest, int k, std::uint64_t seed);

}  // namespace faithful
