#pragma once

#include "faithful/metrics.hpp"
#include "faithful/model_spec.hpp"
#include "faithful/stats.hpp"
#include "faithful/synth.hpp"
#include "faithful/train.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faithful {

/// Everything a WP1/WP2 campaign needs. Mirrors the config file keys.
struct CampaignConfig {
  std::uint64_t seed = 0;
  std::filesystem::path outDir = "results";
  std::filesystem::path dataset;  // empty: synthesize from `synth`
  SynthConfig synth;
  ModelSpec model;  // architecture fields shared by every spec
  TrainConfig train = TrainConfig::desk();

  std::vector<std::string> specs{"C-S"};
  int folds = 4;
  std::vector<int> runFolds;  // empty: all folds
  double alpha = 0.05;
  stats::TTestKind tTest = stats::TTestKind::Welch;
  bool includeBaseline = true;
  bool trainMissing = true;
  bool anovaInteractions = true;

  DivergenceScale divergenceScale = DivergenceScale::Bounded;
  double temporalThreshold = 0.7;
  std::optional<double> spatialThreshold;
  bool calibrateSpatialThreshold = false;

  /// Specs with the shared architecture fields applied.
  std::vector<ModelSpec> model_specs() const;
  std::vector<int> fold_list() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const CampaignConfig& c);
void from_json(const nlohmann::json& j, CampaignConfig& c);

/// Reads a JSON config file; unknown top-level keys are rejected.
CampaignConfig load_config(const std::filesystem::path& path);

std::string_view to_string(DivergenceScale s);
DivergenceScale parse_divergence_scale(std::string_view s);
std::string_view to_string(stats::TTestKind k);
stats::TTestKind parse_ttest_kind(std::string_view s);

}  // namespace faithful
