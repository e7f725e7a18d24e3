#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace faithful::stats {

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double pValue = 1.0;
  std::optional<double> adjustedP;
  std::optional<double> effectSize;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

void to_json(nlohmann::json& j, const TestResult& r);
void from_json(const nlohmann::json& j, TestResult& r);

/// Mean, sample standard deviation (n - 1 denominator) and size.
struct GroupSummary {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;

  static GroupSummary of(std::span<const double> sample);
  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

void to_json(nlohmann::json& j, const GroupSummary& g);
void from_json(const nlohmann::json& j, GroupSummary& g);

// Special functions.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
/// P(|T| >= |t|) for Student-t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// Upper tail P(F >= f) of the F distribution.
double f_survival(double f, double df1, double df2);

/// CDF of the studentized range for k groups and df error degrees of
/// freedom, by nested adaptive Gauss-Kronrod integration.
double studentized_range_cdf(double q, int k, double df);
/// q such that studentized_range_cdf(q, k, df) = 1 - alpha.
double studentized_range_critical(double alpha, int k, double df);

enum class TTestKind { Welch, Paired };

/// Two-sided Welch t-test; statistic is (mean A - mean B) / se.
TestResult welch_t(std::span<const double> a, std::span<const double> b);
/// Two-sided paired t-test on a - b.
TestResult paired_t(std::span<const double> a, std::span<const double> b);
/// Two-sided pooled-variance (Student) t-test.
TestResult pooled_t(std::span<const double> a, std::span<const double> b);
TestResult t_test(std::span<const double> a, std::span<const double> b, TTestKind kind);

/// Welch t-test from summary statistics.
TestResult t_from_summary(double mean_a, double sd_a, int n_a, double mean_b, double sd_b, int n_b);
TestResult t_from_summary(const GroupSummary& a, const GroupSummary& b);

/// Step-up adjusted p-values, returned in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

/// |mean A - mean B| / sqrt((sd A^2 + sd B^2) / 2).
double cohens_d(double mean_a, double sd_a, double mean_b, double sd_b);

// Factorial ANOVA.

struct Observation {
  std::vector<std::string> levels;  // one level per factor, in factor order
  double response = 0.0;
};

struct AnovaRow {
  std::string source;  // factor name, or "A:B" for an interaction
  double sumSquares = 0.0;
  double df = 0.0;
  double meanSquare = 0.0;
  double F = 0.0;
  double pValue = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> effects;
  AnovaRow residual;
  double totalSumSquares = 0.0;

  const AnovaRow& row(const std::string& source) const;
};

void to_json(nlohmann::json& j, const AnovaRow& r);
void to_json(nlohmann::json& j, const AnovaTable& t);

/// Fixed-effects ANOVA on a balanced full-factorial design: main effects and,
/// when requested, all two-way interactions. Higher-order terms pool into the
/// residual.
AnovaTable anova(const std::vector<std::string>& factors, std::span<const Observation> observations,
                 bool two_way_interactions = true);

struct PairwiseResult {
  int groupA = 0;
  int groupB = 0;
  double meanDifference = 0.0;  // mean A - mean B
  TestResult result;            // statistic = q, pValue = adjustedP = Tukey p
};

/// Tukey-Kramer HSD over all pairs of groups.
std::vector<PairwiseResult> tukey_hsd(const std::vector<std::vector<double>>& groups);

}  // namespace faithful::stats
