#include "faithful/replay.hpp"

#include <set>

namespace faithful {

namespace {

stats::GroupSummary g(double mean, double sd) { return {mean, sd, 4}; }

ConfigKey key(const char* label) { return ConfigKey::parse(label); }

}  // namespace

const std::vector<Wp1ReplayEntry>& wp1_replay_inputs() {
  static const std::vector<Wp1ReplayEntry> rows{
      {key("A-ST"), g(2.83, 0.27), g(3.66, 0.34)},   {key("A-S"), g(2.32, 0.14), g(2.74, 0.06)},
      {key("A-T"), g(2.22, 0.18), g(2.90, 0.21)},    {key("C-ST"), g(2.90, 0.52), g(12.16, 3.34)},
      {key("C-S"), g(2.64, 0.37), g(10.43, 4.47)},   {key("C-T"), g(2.28, 0.08), g(2.94, 0.38)},
      {key("CA-ST"), g(2.84, 0.27), g(9.97, 0.38)},  {key("CA-S"), g(2.45, 0.07), g(11.70, 2.71)},
      {key("CA-T"), g(2.60, 0.22), g(5.23, 1.00)},
  };
  return rows;
}

stats::GroupSummary baseline_replay_summary() { return g(2.28, 0.24); }

const std::vector<Wp2ReplayEntry>& wp2_replay_inputs() {
  static const std::vector<Wp2ReplayEntry> rows = [] {
    const std::set<std::string> vs_nc{"A-S", "C-S", "CA-S", "C-ST"};
    const std::set<std::string> vs_uniform{"C-S", "CA-S", "C-ST"};
    std::vector<Wp2ReplayEntry> out;
    for (const Wp1ReplayEntry& e : wp1_replay_inputs()) {
      const std::string l = e.config.label();
      Wp2ReplayEntry r;
      r.config = e.config;
      r.cNc = g(3.0, 0.2);
      r.ncNc = vs_nc.count(l) ? g(4.5, 0.2) : g(3.02, 0.2);
      r.uC = vs_uniform.count(l) ? g(4.5, 0.2) : g(3.02, 0.2);
      if (vs_nc.count(l)) {
        r.divergence.temporal = 0.2;
        r.divergence.spatial = 60.0;
      } else {
        r.divergence.temporal = 0.75;
        r.divergence.spatial = 130.0;
      }
      r.divergence.spatiotemporal = r.divergence.temporal + r.divergence.spatial;
      out.push_back(r);
    }
    return out;
  }();
  return rows;
}

DivergenceThresholds wp2_replay_thresholds() { return {0.7, 125.0}; }

ReplayResult replay_wp1(double alpha) {
  const VerdictOptions opts{alpha, stats::TTestKind::Welch};
  const auto& rows = wp1_replay_inputs();
  const stats::GroupSummary base = baseline_replay_summary();
  std::vector<double> wp1_raw, acc_raw;
  for (const auto& r : rows) {
    wp1_raw.push_back(compare_samples(r.learned, r.uniform).pValue);
    acc_raw.push_back(compare_samples(r.learned, base).pValue);
  }
  const auto wp1_adj = stats::benjamini_hochberg(wp1_raw);
  const auto acc_adj = stats::benjamini_hochberg(acc_raw);
  ReplayResult out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.verdicts.push_back(wp1_verdict(rows[i].config, rows[i].learned, rows[i].uniform, opts, wp1_adj[i]));
    out.accuracy.push_back(accuracy_vs_baseline(rows[i].config, rows[i].learned, base, opts, acc_adj[i]));
  }
  out.report = summary_report(out.verdicts, out.accuracy);
  return out;
}

ReplayResult replay_wp2(double alpha) {
  const VerdictOptions opts{alpha, stats::TTestKind::Welch};
  const auto& rows = wp2_replay_inputs();
  std::vector<double> raw;
  for (const auto& r : rows) {
    raw.push_back(compare_samples(r.cNc, r.ncNc).pValue);
    raw.push_back(compare_samples(r.cNc, r.uC).pValue);
  }
  const auto adj = stats::benjamini_hochberg(raw);
  ReplayResult out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.verdicts.push_back(wp2_verdict(rows[i].config, rows[i].ncNc, rows[i].cNc, rows[i].uC, rows[i].divergence,
                                       wp2_replay_thresholds(), opts, Wp2Adjusted{adj[2 * i], adj[2 * i + 1]}));
  out.report = summary_report(out.verdicts);
  return out;
}

ReplayResult replay_all(double alpha) {
  ReplayResult a = replay_wp1(alpha);
  ReplayResult b = replay_wp2(alpha);
  a.verdicts.insert(a.verdicts.end(), b.verdicts.begin(), b.verdicts.end());
  a.report = summary_report(a.verdicts, a.accuracy);
  return a;
}

}  // namespace faithful
