#pragma once

#include "faithful/stats.hpp"
#include "faithful/verdicts.hpp"

#include <vector>

// Verdicts driven by published summary statistics instead of retrained
// fold samples.

namespace faithful {

struct Wp1ReplayEntry {
  ConfigKey config;
  stats::GroupSummary learned;
  stats::GroupSummary uniform;
};

/// Mean angular error (mean, sd, n = 4 folds) per configuration, learned
/// and random-uniform saliency.
const std::vector<Wp1ReplayEntry>& wp1_replay_inputs();
stats::GroupSummary baseline_replay_summary();

struct Wp2ReplayEntry {
  ConfigKey config;
  stats::GroupSummary ncNc;  // non-contextual model, own saliency
  stats::GroupSummary cNc;   // non-contextual model, transplanted contextual saliency
  stats::GroupSummary uC;    // contextual model, frozen uniform saliency
  DivergenceReport divergence;
};

/// Stylized samples encoding the reported WP2 significance pattern: (i) holds
/// for A-S, C-S, CA-S and C-ST; (ii) holds for C-S, CA-S and C-ST; every other
/// config has divergence above both thresholds (PAPER_SCALE).
const std::vector<Wp2ReplayEntry>& wp2_replay_inputs();
DivergenceThresholds wp2_replay_thresholds();

struct ReplayResult {
  std::vector<VerdictRecord> verdicts;
  std::vector<AccuracyComparison> accuracy;
  Report report;
};

/// WP1 for all nine configs plus accuracy against the baseline, each family
/// BH-adjusted across the configs.
ReplayResult replay_wp1(double alpha = 0.05);
/// WP2 with BH over all (i)/(ii) comparisons.
ReplayResult replay_wp2(double alpha = 0.05);
/// Both, merged into one summary table.
ReplayResult replay_all(double alpha = 0.05);

}  // namespace faithful
