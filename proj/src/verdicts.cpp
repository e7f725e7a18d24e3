#include "faithful/verdicts.hpp"

#include "faithful/error.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace faithful {

namespace {

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int sample_size(const Sample& s) {
  if (const auto* raw = std::get_if<std::vector<double>>(&s)) return static_cast<int>(raw->size());
  return std::get<stats::GroupSummary>(s).n;
}

void require_sample_size(const Sample& s, const char* name) {
  if (sample_size(s) < 2) throw InputError(std::string(name) + ": need at least 2 folds");
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string ConfigKey::label() const {
  if (type == SaliencyType::None) return "B";
  return std::string(to_string(type)) + "-" + std::string(to_string(dims));
}

ConfigKey ConfigKey::parse(std::string_view label) {
  if (label == "B") return {};
  const auto dash = label.find('-');
  if (dash == std::string_view::npos)
    throw ConfigurationError("config label '" + std::string(label) + "' is not of the form TYPE-DIMS");
  return {parse_saliency_type(label.substr(0, dash)), parse_saliency_dims(label.substr(dash + 1))};
}

std::string_view to_string(WpTest t) { return t == WpTest::WP1 ? "WP1" : "WP2"; }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

WpTest parse_wp_test(std::string_view s) {
  if (s == "WP1") return WpTest::WP1;
  if (s == "WP2") return WpTest::WP2;
  throw ConfigurationError("unknown test '" + std::string(s) + "'");
}

Outcome parse_outcome(std::string_view s) {
  if (s == "PASS") return Outcome::Pass;
  if (s == "FAIL") return Outcome::Fail;
  if (s == "INCONCLUSIVE") return Outcome::Inconclusive;
  throw ConfigurationError("unknown outcome '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const VerdictRecord& v) {
  nlohmann::json comparisons = nlohmann::json::array();
  for (const Comparison& c : v.comparisons)
    comparisons.push_back({{"label", c.label}, {"result", c.result}});
  j = nlohmann::json{{"config", v.config.label()},
                     {"test", to_string(v.test)},
                     {"outcome", to_string(v.outcome)},
                     {"comparisons", comparisons},
                     {"divergence", v.divergence ? nlohmann::json(*v.divergence) : nlohmann::json(nullptr)},
                     {"rationale", v.rationale},
                     {"decidedAtStep", v.decidedAtStep}};
}

void from_json(const nlohmann::json& j, VerdictRecord& v) {
  v.config = ConfigKey::parse(j.at("config").get<std::string>());
  v.test = parse_wp_test(j.at("test").get<std::string>());
  v.outcome = parse_outcome(j.at("outcome").get<std::string>());
  v.comparisons.clear();
  for (const auto& c : j.at("comparisons"))
    v.comparisons.push_back({c.at("label").get<std::string>(), c.at("result").get<stats::TestResult>()});
  v.divergence = j.contains("divergence") && !j["divergence"].is_null()
                     ? std::optional(j["divergence"].get<DivergenceReport>())
                     : std::nullopt;
  v.rationale = j.value("rationale", std::string{});
  v.decidedAtStep = j.value("decidedAtStep", 1);
}

double sample_mean(const Sample& s) {
  if (const auto* raw = std::get_if<std::vector<double>>(&s)) {
    if (raw->empty()) throw InputError("empty sample");
    double acc = 0.0;
    for (double x : *raw) acc += x;
    return acc / static_cast<double>(raw->size());
  }
  return std::get<stats::GroupSummary>(s).mean;
}

stats::TestResult compare_samples(const Sample& candidate, const Sample& reference,
                                  stats::TTestKind kind) {
  const auto* a = std::get_if<std::vector<double>>(&candidate);
  const auto* b = std::get_if<std::vector<double>>(&reference);
  if (a && b) return stats::t_test(*a, *b, kind);
  if (kind == stats::TTestKind::Paired)
    throw ConfigurationError("paired t-test needs raw per-fold samples");
  auto summary = [](const Sample& s) {
    if (const auto* raw = std::get_if<std::vector<double>>(&s)) return stats::GroupSummary::of(*raw);
    return std::get<stats::GroupSummary>(s);
  };
  return stats::t_from_summary(summary(candidate), summary(reference));
}

bool significantly_better(const Sample& candidate, const Sample& reference,
                          const stats::TestResult& result, double alpha) {
  const double p = result.adjustedP.value_or(result.pValue);
  return sample_mean(candidate) < sample_mean(reference) && p < alpha;
}

VerdictRecord wp1_verdict(const ConfigKey& config, const Sample& learned, const Sample& uniform,
                          const VerdictOptions& options, std::optional<double> adjusted_p) {
  require_sample_size(learned, "wp1_verdict");
  require_sample_size(uniform, "wp1_verdict");
  stats::TestResult r = compare_samples(learned, uniform, options.tTest);
  r.adjustedP = adjusted_p.value_or(r.pValue);

  VerdictRecord v;
  v.config = config;
  v.test = WpTest::WP1;
  v.comparisons.push_back({"learned vs uniform", r});
  const double ml = sample_mean(learned), mu = sample_mean(uniform);
  const bool pass = significantly_better(learned, uniform, r, options.alpha);
  v.outcome = pass ? Outcome::Pass : Outcome::Fail;
  v.rationale = "learned MAE " + fmt(ml) + " vs uniform MAE " + fmt(mu) + ", adjusted p " +
                fmt(*r.adjustedP) + ", d " + fmt(*r.effectSize) +
                (pass ? ": learned saliency is significantly better"
                      : (mu > ml ? ": difference not significant" : ": uniform saliency is not worse"));
  return v;
}

bool divergence_is_high(const ConfigKey& config, const DivergenceReport& divergence,
                        const DivergenceThresholds& thresholds) {
  const bool spatial = config.dims == SaliencyDims::Spatial || config.dims == SaliencyDims::SpatioTemporal;
  const bool temporal =
      config.dims == SaliencyDims::Temporal || config.dims == SaliencyDims::SpatioTemporal;
  if (!spatial && !temporal) throw InputError("divergence screening needs a saliency dimension");
  bool high = true;
  if (spatial) {
    if (!thresholds.spatial)
      throw ConfigurationError("spatial divergence threshold is required for " + config.label());
    high = high && divergence.spatial > *thresholds.spatial;
  }
  if (temporal) high = high && divergence.temporal > thresholds.temporal;
  return high;
}

VerdictRecord wp2_verdict(const ConfigKey& config, const Sample& nc_nc, const Sample& c_nc,
                          const Sample& u_c, const std::optional<DivergenceReport>& divergence,
                          const DivergenceThresholds& thresholds, const VerdictOptions& options,
                          std::optional<Wp2Adjusted> adjusted) {
  for (const Sample* s : {&nc_nc, &c_nc, &u_c}) require_sample_size(*s, "wp2_verdict");
  stats::TestResult first = compare_samples(c_nc, nc_nc, options.tTest);
  stats::TestResult second = compare_samples(c_nc, u_c, options.tTest);
  if (!adjusted) {
    const std::vector<double> raw{first.pValue, second.pValue};
    const std::vector<double> adj = stats::benjamini_hochberg(raw);
    adjusted = Wp2Adjusted{adj[0], adj[1]};
  }
  first.adjustedP = adjusted->vsNonContextual;
  second.adjustedP = adjusted->vsUniform;

  VerdictRecord v;
  v.config = config;
  v.test = WpTest::WP2;
  v.comparisons = {{"(i) transplanted vs non-contextual", first},
                   {"(ii) transplanted vs uniform contextual", second}};
  v.divergence = divergence;

  const std::string means_i = "MAE " + fmt(sample_mean(c_nc)) + " vs " + fmt(sample_mean(nc_nc)) +
                              ", adjusted p " + fmt(*first.adjustedP);
  if (!significantly_better(c_nc, nc_nc, first, options.alpha)) {
    if (!divergence)
      throw InputError("wp2_verdict: divergence is required when comparison (i) is not significant");
    v.decidedAtStep = 1;
    if (divergence_is_high(config, *divergence, thresholds)) {
      v.outcome = Outcome::Fail;
      v.rationale = "(i) not significant (" + means_i +
                    ") despite high divergence: saliency is not used by the model";
    } else {
      v.outcome = Outcome::Inconclusive;
      v.rationale = "(i) not significant (" + means_i +
                    ") and divergence is low: the saliency sets may simply agree";
    }
    return v;
  }

  v.decidedAtStep = 2;
  const std::string means_ii = "MAE " + fmt(sample_mean(c_nc)) + " vs " + fmt(sample_mean(u_c)) +
                               ", adjusted p " + fmt(*second.adjustedP);
  if (significantly_better(c_nc, u_c, second, options.alpha)) {
    v.outcome = Outcome::Pass;
    v.rationale = "(i) holds (" + means_i + "); (ii) holds (" + means_ii + ")";
  } else {
    v.outcome = Outcome::Fail;
    v.rationale = "(i) holds (" + means_i + "); (ii) fails (" + means_ii +
                  "): the contextual architecture outweighs the saliency";
  }
  return v;
}

std::string_view to_string(AccuracyOutcome a) {
  switch (a) {
    case AccuracyOutcome::Better: return "BETTER";
    case AccuracyOutcome::Comparable: return "COMPARABLE";
    case AccuracyOutcome::Worse: return "WORSE";
  }
  return "?";
}

AccuracyOutcome parse_accuracy_outcome(std::string_view s) {
  if (s == "BETTER") return AccuracyOutcome::Better;
  if (s == "COMPARABLE") return AccuracyOutcome::Comparable;
  if (s == "WORSE") return AccuracyOutcome::Worse;
  throw ConfigurationError("unknown accuracy outcome '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const AccuracyComparison& a) {
  j = nlohmann::json{{"config", a.config.label()},
                     {"configMean", a.configMean},
                     {"baselineMean", a.baselineMean},
                     {"result", a.result},
                     {"outcome", to_string(a.outcome)}};
}

void from_json(const nlohmann::json& j, AccuracyComparison& a) {
  a.config = ConfigKey::parse(j.at("config").get<std::string>());
  a.configMean = j.at("configMean").get<double>();
  a.baselineMean = j.at("baselineMean").get<double>();
  a.result = j.at("result").get<stats::TestResult>();
  a.outcome = parse_accuracy_outcome(j.at("outcome").get<std::string>());
}

AccuracyComparison accuracy_vs_baseline(const ConfigKey& config, const Sample& model,
                                        const Sample& baseline, const VerdictOptions& options,
                                        std::optional<double> adjusted_p) {
  AccuracyComparison a;
  a.config = config;
  a.configMean = sample_mean(model);
  a.baselineMean = sample_mean(baseline);
  a.result = compare_samples(model, baseline, options.tTest);
  a.result.adjustedP = adjusted_p.value_or(a.result.pValue);
  if (*a.result.adjustedP >= options.alpha || a.configMean == a.baselineMean)
    a.outcome = AccuracyOutcome::Comparable;
  else
    a.outcome = a.configMean < a.baselineMean ? AccuracyOutcome::Better : AccuracyOutcome::Worse;
  return a;
}

Report summary_report(std::span<const VerdictRecord> verdicts,
                      std::span<const AccuracyComparison> accuracy) {
  std::map<ConfigKey, const VerdictRecord*> wp1, wp2;
  std::map<ConfigKey, const AccuracyComparison*> acc;
  std::set<ConfigKey> configs;
  for (const VerdictRecord& v : verdicts) {
    auto& slot = v.test == WpTest::WP1 ? wp1 : wp2;
    if (!slot.emplace(v.config, &v).second)
      throw InputError("duplicate " + std::string(to_string(v.test)) + " verdict for " +
                       v.config.label());
    configs.insert(v.config);
  }
  for (const AccuracyComparison& a : accuracy) {
    if (!acc.emplace(a.config, &a).second)
      throw InputError("duplicate accuracy comparison for " + a.config.label());
    configs.insert(a.config);
  }

  auto cell = [](const auto& table, const ConfigKey& k) -> const VerdictRecord* {
    auto it = table.find(k);
    return it == table.end() ? nullptr : it->second;
  };
  auto verdict_json = [](const VerdictRecord* v) -> nlohmann::ordered_json {
    if (!v) return nullptr;
    nlohmann::ordered_json j;
    j["outcome"] = to_string(v->outcome);
    j["decidedAtStep"] = v->decidedAtStep;
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (const Comparison& c : v->comparisons)
      ps.push_back({{"label", c.label},
                    {"adjustedP", optional_json(c.result.adjustedP)},
                    {"effectSize", optional_json(c.result.effectSize)}});
    j["comparisons"] = ps;
    return j;
  };
  auto verdict_text = [](const VerdictRecord* v) -> std::string {
    if (!v) return "-";
    std::string s(to_string(v->outcome));
    if (v->test == WpTest::WP1 && !v->comparisons.empty()) {
      const auto& r = v->comparisons.front().result;
      s += " (p=" + fmt(r.adjustedP.value_or(r.pValue), "%.3g") + ", d=" +
           fmt(r.effectSize.value_or(0.0), "%.2f") + ")";
    } else if (v->test == WpTest::WP2) {
      s += " (step " + std::to_string(v->decidedAtStep) + ")";
    }
    return s;
  };

  Report report;
  report.json["rows"] = nlohmann::ordered_json::array();
  std::ostringstream text;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s  %-28s  %-26s  %s\n", "config", "accuracy vs baseline",
                "WP1", "WP2");
  text << line;
  for (const ConfigKey& k : configs) {
    nlohmann::ordered_json row;
    row["config"] = k.label();
    std::string acc_text = "-";
    if (auto it = acc.find(k); it != acc.end()) {
      const AccuracyComparison& a = *it->second;
      row["accuracy"] = {{"outcome", to_string(a.outcome)},
                         {"configMean", a.configMean},
                         {"baselineMean", a.baselineMean},
                         {"adjustedP", optional_json(a.result.adjustedP)}};
      acc_text = std::string(to_string(a.outcome)) + " (" + fmt(a.configMean, "%.2f") + " vs " +
                 fmt(a.baselineMean, "%.2f") + ")";
    } else {
      row["accuracy"] = nullptr;
    }
    const VerdictRecord* v1 = cell(wp1, k);
    const VerdictRecord* v2 = cell(wp2, k);
    row["wp1"] = verdict_json(v1);
    row["wp2"] = verdict_json(v2);
    report.json["rows"].push_back(row);
    std::snprintf(line, sizeof line, "%-6s  %-28s  %-26s  %s\n", k.label().c_str(), acc_text.c_str(),
                  verdict_text(v1).c_str(), verdict_text(v2).c_str());
    text << line;
  }
  report.text = text.str();
  return report;
}

}  // namespace faithful
