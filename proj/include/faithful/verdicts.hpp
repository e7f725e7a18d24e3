#pragma once

#include "faithful/metrics.hpp"
#include "faithful/model_spec.hpp"
#include "faithful/stats.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace faithful {

/// Saliency configuration a verdict refers to. Orders by type, then dims.
struct ConfigKey {
  SaliencyType type = SaliencyType::None;
  SaliencyDims dims = SaliencyDims::None;

  std::string label() const;
  static ConfigKey parse(std::string_view label);
  static ConfigKey of(const ModelSpec& spec) { return {spec.type, spec.dims}; }

  friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
};

enum class WpTest { WP1, WP2 };
enum class Outcome { Pass, Fail, Inconclusive };

std::string_view to_string(WpTest t);
std::string_view to_string(Outcome o);
WpTest parse_wp_test(std::string_view s);
Outcome parse_outcome(std::string_view s);

struct Comparison {
  std::string label;
  stats::TestResult result;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct VerdictRecord {
  ConfigKey config;
  WpTest test = WpTest::WP1;
  Outcome outcome = Outcome::Fail;
  std::vector<Comparison> comparisons;
  std::optional<DivergenceReport> divergence;
  std::string rationale;
  int decidedAtStep = 1;  // WP2 decision-tree step that settled the outcome

  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

void to_json(nlohmann::json& j, const VerdictRecord& v);
void from_json(const nlohmann::json& j, VerdictRecord& v);

/// Per-fold MAEs, either raw or as (mean, sd, n) summaries.
using Sample = std::variant<std::vector<double>, stats::GroupSummary>;

double sample_mean(const Sample& s);

struct VerdictOptions {
  double alpha = 0.05;
  stats::TTestKind tTest = stats::TTestKind::Welch;
};

/// Two-sided test of `candidate` against `reference`; statistic is negative
/// when the candidate has the lower MAE. Summary samples support Welch only.
stats::TestResult compare_samples(const Sample& candidate, const Sample& reference,
                                  stats::TTestKind kind = stats::TTestKind::Welch);

/// Candidate has the lower mean and an adjusted p below alpha.
bool significantly_better(const Sample& candidate, const Sample& reference,
                          const stats::TestResult& result, double alpha);

/// PASS iff uniform MAE exceeds learned MAE with adjusted p < alpha.
/// Without `adjusted_p` the comparison is its own BH family (m = 1).
VerdictRecord wp1_verdict(const ConfigKey& config, const Sample& learned, const Sample& uniform,
                          const VerdictOptions& options = {},
                          std::optional<double> adjusted_p = std::nullopt);

struct DivergenceThresholds {
  double temporal = 0.7;
  std::optional<double> spatial;  // required whenever spatial divergence is consulted
};

/// Adjusted p for comparisons (i) and (ii); BH over the pair when absent.
struct Wp2Adjusted {
  double vsNonContextual = 1.0;
  double vsUniform = 1.0;
};

/// Three-scenario WP2 decision: (i) transplanted vs own non-contextual
/// saliency, divergence screening when (i) fails, then (ii) transplanted vs
/// frozen-uniform contextual model.
VerdictRecord wp2_verdict(const ConfigKey& config, const Sample& nc_nc, const Sample& c_nc,
                          const Sample& u_c, const std::optional<DivergenceReport>& divergence,
                          const DivergenceThresholds& thresholds, const VerdictOptions& options = {},
                          std::optional<Wp2Adjusted> adjusted = std::nullopt);

/// Whether divergence counts as high on the dimensions of `config`; ST
/// requires both dimensions to be high.
bool divergence_is_high(const ConfigKey& config, const DivergenceReport& divergence,
                        const DivergenceThresholds& thresholds);

enum class AccuracyOutcome { Better, Comparable, Worse };
std::string_view to_string(AccuracyOutcome a);
AccuracyOutcome parse_accuracy_outcome(std::string_view s);

struct AccuracyComparison {
  ConfigKey config;
  double configMean = 0.0;
  double baselineMean = 0.0;
  stats::TestResult result;
  AccuracyOutcome outcome = AccuracyOutcome::Comparable;

  friend bool operator==(const AccuracyComparison&, const AccuracyComparison&) = default;
};

void to_json(nlohmann::json& j, const AccuracyComparison& a);
void from_json(const nlohmann::json& j, AccuracyComparison& a);

AccuracyComparison accuracy_vs_baseline(const ConfigKey& config, const Sample& model,
                                        const Sample& baseline, const VerdictOptions& options = {},
                                        std::optional<double> adjusted_p = std::nullopt);

struct Report {
  nlohmann::ordered_json json;
  std::string text;
};

/// Configs x {accuracy, WP1, WP2} table. Rows ordered by type then dims.
Report summary_report(std::span<const VerdictRecord> verdicts,
                      std::span<const AccuracyComparison> accuracy = {});

}  // namespace faithful
