#pragma once

#include "faithful/config.hpp"
#include "faithful/dataset.hpp"
#include "faithful/model.hpp"
#include "faithful/results.hpp"
#include "faithful/stats.hpp"
#include "faithful/verdicts.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

// Campaign layout under outDir, in addition to the ResultsStore layout:
//   campaign.json    config echo written at campaign start
//   split.json       fold assignment shared by every run
//   data/            synthetic dataset when no dataset path is configured
//   wp1.json/.txt, wp2.json/.txt, report.json/.txt
//
// Run ids: <label>/fold<k>/<role>, role one of learned, uniform, nc-own,
// nc-transplanted, calibration.

namespace faithful {

using Progress = std::function<void(const std::string&)>;

enum class RunRole { Learned, Uniform, NcOwn, NcTransplanted, Calibration };
std::string_view to_string(RunRole r);

std::string run_id(const std::string& label, int fold, RunRole role);
/// Checkpoint name of the network a role is evaluated with.
std::string checkpoint_name(const std::string& label, int fold, RunRole role);

/// Configured dataset, or a synthetic one generated under outDir/data. The
/// fold split is created once and reused from outDir/split.json.
DatasetManifest prepare_dataset(const CampaignConfig& config);

/// Trains (or loads) the network for one spec/fold/role. Missing checkpoints
/// with trainMissing off raise OrchestrationError.
Model obtain_model(const CampaignConfig& config, const ResultsStore& store, const DatasetManifest& manifest,
                   const ModelSpec& spec, int fold, RunRole role, const Progress& progress = {});

/// Trains on every fold but `fold`, evaluates on `fold`, persists the
/// checkpoint and a learned-weights RunRecord.
RunRecord train_and_record(const CampaignConfig& config, const ResultsStore& store,
                           const DatasetManifest& manifest, const ModelSpec& spec, int fold,
                           const Progress& progress = {});

struct TukeyRow {
  std::string groupA;
  std::string groupB;
  stats::PairwiseResult result;
};

struct Wp1Result {
  std::vector<VerdictRecord> verdicts;
  std::vector<AccuracyComparison> accuracy;
  std::optional<stats::AnovaTable> anova;
  std::vector<std::string> anovaFactors;
  std::string anovaNote;
  std::vector<TukeyRow> tukey;
  Report report;
};

struct Wp2Result {
  std::vector<VerdictRecord> verdicts;
  DivergenceThresholds thresholds;
  Report report;
};

/// Runs (or resumes) every WP1 run, then writes verdicts and reports.
Wp1Result run_wp1(const CampaignConfig& config, const Progress& progress = {});
Wp2Result run_wp2(const CampaignConfig& config, const Progress& progress = {});

/// Report generation from persisted records only. A missing record raises
/// LookupError; nothing is recomputed.
Wp1Result wp1_report(const CampaignConfig& config, const ResultsStore& store);
Wp2Result wp2_report(const CampaignConfig& config, const ResultsStore& store);

/// Combined summary from whichever of verdicts/wp1.json and verdicts/wp2.json
/// exist; writes report.json and report.txt under outDir.
Report regenerate_report(const CampaignConfig& config);

/// Writes <stem>.json and <stem>.txt.
void write_report(const Report& report, const std::filesystem::path& stem);

}  // namespace faithful
