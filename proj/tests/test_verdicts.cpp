#include "faithful/error.hpp"
#include "faithful/replay.hpp"
#include "faithful/rng.hpp"
#include "faithful/verdicts.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace faithful;

namespace {

const ConfigKey kCS = ConfigKey::parse("C-S");
const std::vector<double> kLow{2.0, 2.2, 2.1, 1.9};
const std::vector<double> kHigh{4.0, 4.3, 3.8, 4.1};
const DivergenceThresholds kThresh{0.7, 0.5};

std::set<std::string> labels_with(const std::vector<VerdictRecord>& vs, Outcome o) {
  std::set<std::string> out;
  for (const auto& v : vs)
    if (v.outcome == o) out.insert(v.config.label());
  return out;
}

}  // namespace

TEST_CASE("WP1 replay: all nine configs pass with large effects") {
  const ReplayResult r = replay_wp1();
  REQUIRE(r.verdicts.size() == 9);
  for (const VerdictRecord& v : r.verdicts) {
    CAPTURE(v.config.label());
    CHECK(v.outcome == Outcome::Pass);
    REQUIRE(v.comparisons.size() == 1);
    CHECK(*v.comparisons[0].result.adjustedP < 0.05);
    CHECK(std::fabs(*v.comparisons[0].result.effectSize) > 1.0);
  }
}

TEST_CASE("baseline replay: A-T is not significantly different from B") {
  const auto& rows = wp1_replay_inputs();
  const auto at = std::find_if(rows.begin(), rows.end(), [](const auto& e) { return e.config.label() == "A-T"; });
  const stats::TestResult t = stats::t_from_summary(baseline_replay_summary(), at->learned);
  CHECK(t.pValue > 0.05);
  const ReplayResult r = replay_wp1();
  for (const AccuracyComparison& a : r.accuracy)
    if (a.config.label() == "A-T") CHECK(a.outcome == AccuracyOutcome::Comparable);
}

TEST_CASE("WP2 replay reproduces the reported outcome") {
  const ReplayResult r = replay_wp2();
  REQUIRE(r.verdicts.size() == 9);
  CHECK(labels_with(r.verdicts, Outcome::Pass) == std::set<std::string>{"C-S", "CA-S", "C-ST"});
  CHECK(labels_with(r.verdicts, Outcome::Inconclusive).empty());
  for (const VerdictRecord& v : r.verdicts) {
    CAPTURE(v.config.label());
    const std::string l = v.config.label();
    if (l == "A-S") {
      CHECK(v.outcome == Outcome::Fail);
      CHECK(v.decidedAtStep == 2);
    } else if (l != "C-S" && l != "CA-S" && l != "C-ST") {
      CHECK(v.outcome == Outcome::Fail);
      CHECK(v.decidedAtStep == 1);
    }
  }
}

TEST_CASE("replay summary table combines all three columns") {
  const ReplayResult r = replay_all();
  CHECK(r.report.json["rows"].size() == 9);
  CHECK(r.report.text.find("CA-ST") != std::string::npos);
  CHECK(r.report.json["rows"][0]["config"] == "A-S");
}

TEST_CASE("WP1 verdict basics") {
  CHECK(wp1_verdict(kCS, kLow, kHigh).outcome == Outcome::Pass);
  const VerdictRecord same = wp1_verdict(kCS, kLow, kLow);
  CHECK(same.outcome == Outcome::Fail);
  CHECK(*same.comparisons[0].result.adjustedP == 1.0);
  CHECK(wp1_verdict(kCS, kHigh, kLow).outcome == Outcome::Fail);
  CHECK(wp1_verdict(kCS, kLow, kHigh, {}, 0.2).outcome == Outcome::Fail);
  CHECK_THROWS_AS(wp1_verdict(kCS, std::vector<double>{1.0}, kHigh), InputError);
  CHECK(wp1_verdict(kCS, kLow, kHigh).comparisons[0].result.effectSize.has_value());
}

TEST_CASE("WP1 verdict is invariant to fold order") {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(4), b(4);
    for (double& x : a) x = rng.uniform(1, 4);
    for (double& x : b) x = rng.uniform(1, 5);
    const VerdictRecord v = wp1_verdict(kCS, a, b);
    std::reverse(a.begin(), a.end());
    std::rotate(b.begin(), b.begin() + 1, b.end());
    const VerdictRecord w = wp1_verdict(kCS, a, b);
    CHECK(v.outcome == w.outcome);
    CHECK(*v.comparisons[0].result.adjustedP == doctest::Approx(*w.comparisons[0].result.adjustedP).epsilon(1e-12));
  }
}

TEST_CASE("paired t-tests need raw samples") {
  const VerdictOptions paired{0.05, stats::TTestKind::Paired};
  CHECK(wp1_verdict(kCS, kLow, kHigh, paired).outcome == Outcome::Pass);
  CHECK_THROWS_AS(wp1_verdict(kCS, stats::GroupSummary{2, 0.1, 4}, stats::GroupSummary{3, 0.1, 4}, paired),
                  ConfigurationError);
}

TEST_CASE("WP2 decision tree") {
  DivergenceReport low, high;
  low.spatial = 0.1;
  high.spatial = 0.9;
  // (i) and (ii) significant.
  VerdictRecord v = wp2_verdict(kCS, kHigh, kLow, kHigh, std::nullopt, kThresh);
  CHECK(v.outcome == Outcome::Pass);
  CHECK(v.decidedAtStep == 2);
  // (i) holds, (ii) fails.
  v = wp2_verdict(kCS, kHigh, kLow, kLow, std::nullopt, kThresh);
  CHECK(v.outcome == Outcome::Fail);
  CHECK(v.decidedAtStep == 2);
  // (i) fails: divergence decides.
  v = wp2_verdict(kCS, kLow, kLow, kHigh, high, kThresh);
  CHECK(v.outcome == Outcome::Fail);
  CHECK(v.decidedAtStep == 1);
  v = wp2_verdict(kCS, kLow, kLow, kHigh, low, kThresh);
  CHECK(v.outcome == Outcome::Inconclusive);
  CHECK(v.decidedAtStep == 1);
  CHECK_THROWS_AS(wp2_verdict(kCS, kLow, kLow, kHigh, std::nullopt, kThresh), InputError);
  CHECK_THROWS_AS(wp2_verdict(kCS, kLow, kLow, kHigh, low, DivergenceThresholds{0.7, std::nullopt}),
                  ConfigurationError);
}

TEST_CASE("WP2 never passes without comparison (i)") {
  Rng rng(4);
  const ConfigKey st = ConfigKey::parse("C-ST");
  for (int k = 0; k < 200; ++k) {
    std::vector<double> nc(4), c(4), u(4);
    for (double& x : nc) x = rng.uniform(1, 3);
    for (double& x : c) x = rng.uniform(1, 3);
    for (double& x : u) x = rng.uniform(1, 6);
    DivergenceReport d;
    d.temporal = rng.uniform(0, 1);
    d.spatial = rng.uniform(0, 1);
    const VerdictRecord v = wp2_verdict(st, nc, c, u, d, kThresh);
    const bool first = v.comparisons.size() >= 1 && v.comparisons[0].result.adjustedP &&
                       *v.comparisons[0].result.adjustedP < 0.05 &&
                       sample_mean(Sample(c)) < sample_mean(Sample(nc));
    if (!first) CHECK(v.outcome != Outcome::Pass);
    if (v.outcome == Outcome::Inconclusive) CHECK_FALSE(divergence_is_high(st, d, kThresh));
  }
}

TEST_CASE("identical samples give INCONCLUSIVE below and FAIL above the threshold") {
  for (double s : {0.0, 0.2, 0.49}) {
    DivergenceReport d;
    d.spatial = s;
    CHECK(wp2_verdict(kCS, kLow, kLow, kLow, d, kThresh).outcome == Outcome::Inconclusive);
  }
  for (double s : {0.51, 1.0, 3.0}) {
    DivergenceReport d;
    d.spatial = s;
    CHECK(wp2_verdict(kCS, kLow, kLow, kLow, d, kThresh).outcome == Outcome::Fail);
  }
}

TEST_CASE("spatiotemporal divergence is high only when both dimensions are") {
  const ConfigKey st = ConfigKey::parse("A-ST");
  DivergenceReport d;
  d.temporal = 0.8;
  d.spatial = 0.1;
  CHECK_FALSE(divergence_is_high(st, d, kThresh));
  d.spatial = 0.6;
  CHECK(divergence_is_high(st, d, kThresh));
  CHECK(divergence_is_high(ConfigKey::parse("A-T"), d, DivergenceThresholds{0.7, std::nullopt}));
}

TEST_CASE("summary report ordering, duplicates and determinism") {
  CHECK(summary_report({}).json["rows"].empty());
  std::vector<VerdictRecord> vs{wp1_verdict(ConfigKey::parse("CA-ST"), kLow, kHigh),
                                wp1_verdict(ConfigKey::parse("A-T"), kLow, kHigh),
                                wp1_verdict(ConfigKey::parse("A-S"), kLow, kHigh)};
  const Report r = summary_report(vs);
  CHECK(r.json["rows"][0]["config"] == "A-S");
  CHECK(r.json["rows"][1]["config"] == "A-T");
  CHECK(r.json["rows"][2]["config"] == "CA-ST");
  CHECK(summary_report(vs).json.dump() == r.json.dump());
  CHECK(summary_report(vs).text == r.text);
  vs.push_back(vs[0]);
  CHECK_THROWS_AS(summary_report(vs), InputError);
}

TEST_CASE("verdict records round-trip through JSON") {
  DivergenceReport d;
  d.temporal = 0.3;
  d.spatial = 0.9;
  d.perFrameSpatial = {0.8, 1.0};
  const VerdictRecord v = wp2_verdict(kCS, kLow, kLow, kHigh, d, kThresh);
  CHECK(nlohmann::json(v).get<VerdictRecord>() == v);
  const AccuracyComparison a = accuracy_vs_baseline(kCS, kLow, kHigh);
  CHECK(a.outcome == AccuracyOutcome::Better);
  CHECK(nlohmann::json(a).get<AccuracyComparison>() == a);
}
