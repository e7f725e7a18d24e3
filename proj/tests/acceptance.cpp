// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include "support.hpp"

#include "faithful/augment.hpp"
#include "faithful/campaign.hpp"
#include "faithful/error.hpp"
#include "faithful/heatmap.hpp"
#include "faithful/image.hpp"
#include "faithful/interventions.hpp"
#include "faithful/layers.hpp"
#include "faithful/metrics.hpp"
#include "faithful/model.hpp"
#include "faithful/replay.hpp"
#include "faithful/results.hpp"
#include "faithful/stats.hpp"
#include "faithful/synth.hpp"
#include "faithful/tensor_io.hpp"
#include "faithful/train.hpp"
#include "faithful/verdicts.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

using namespace faithful;
using testing::max_grad_error;
using testing::probe;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::set<std::string> labels_with(const std::vector<VerdictRecord>& vs, Outcome o) {
  std::set<std::string> out;
  for (const auto& v : vs)
    if (v.outcome == o) out.insert(v.config.label());
  return out;
}

template <typename Module>
std::vector<ad::Var> params_of(const Module& m) {
  ParameterList list;
  m.collect("m", list);
  std::vector<ad::Var> out;
  for (const auto& [name, v] : list.entries()) out.push_back(v);
  return out;
}

template <typename Module>
void zero_params(const Module& m) {
  for (ad::Var v : params_of(m)) v.mutable_value().setZero();
}

FrameSequence random_sequence(std::uint64_t seed, int frames) {
  Rng rng(seed);
  FrameSequence seq;
  seq.id = "seq_" + std::to_string(seed);
  for (int t = 0; t < frames; ++t) {
    Image img(3, 16, 16);
    for (auto& v : img.data) v = rng.uniform(0.05, 1.0);
    seq.frames.push_back(img);
  }
  seq.illuminant = Eigen::Vector3d(0.5, 0.6, 0.4).normalized();
  return seq;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// 1
void wp1_replay(Checks& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReplayResult r = replay_wp1();
  c.expect(seconds_since(t0) < 1.0, "runtime under 1 s");
  c.expect(r.verdicts.size() == 9, "nine verdicts");
  for (const VerdictRecord& v : r.verdicts) {
    const auto& res = v.comparisons.at(0).result;
    c.expect(v.outcome == Outcome::Pass, v.config.label() + " PASS");
    c.expect(res.adjustedP && *res.adjustedP < 0.05, v.config.label() + " adjusted p < 0.05");
    c.expect(res.effectSize && std::fabs(*res.effectSize) > 1.0, v.config.label() + " |d| > 1");
  }
}

// 2
void wp2_replay(Checks& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReplayResult r = replay_wp2();
  c.expect(seconds_since(t0) < 1.0, "runtime under 1 s");
  c.expect(r.verdicts.size() == 9, "nine verdicts");
  c.expect(labels_with(r.verdicts, Outcome::Pass) == std::set<std::string>{"C-S", "CA-S", "C-ST"}, "PASS set");
  for (const VerdictRecord& v : r.verdicts) {
    const std::string l = v.config.label();
    if (l == "C-S" || l == "CA-S" || l == "C-ST") continue;
    c.expect(v.outcome == Outcome::Fail, l + " FAIL");
    c.expect(v.decidedAtStep == (l == "A-S" ? 2 : 1), l + " decided at the expected step");
  }
}

// 3
void baseline_replay(Checks& c) {
  for (const Wp1ReplayEntry& e : wp1_replay_inputs()) {
    if (e.config.label() != "A-T") continue;
    const stats::TestResult t = stats::t_from_summary(baseline_replay_summary(), e.learned);
    c.expect(t.pValue > 0.05, "A-T vs B not significant");
    return;
  }
  c.expect(false, "A-T row present");
}

// 4
double quadrature_two_sided_p(double t, double df) {
  const double k = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return k * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  boost::math::quadrature::exp_sinh<double> integrator;
  return 2.0 * integrator.integrate(density, std::fabs(t), std::numeric_limits<double>::infinity());
}

void statistics_oracles(Checks& c) {
  Rng rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto draw = [&](int n) {
      const double mu = rng.uniform(0, 3), sd = rng.uniform(0.2, 2);
      std::vector<double> v(static_cast<std::size_t>(n));
      for (double& x : v) x = mu + sd * rng.normal();
      return v;
    };
    const int na = 2 + static_cast<int>(rng.below(9)), nb = 2 + static_cast<int>(rng.below(9));
    const auto a = draw(na), b = draw(nb);
    const stats::TestResult r = stats::welch_t(a, b);
    worst = std::max(worst, std::fabs(r.pValue - quadrature_two_sided_p(r.statistic, r.df)));
  }
  c.expect(worst < 1e-6, "Welch p within 1e-6 of quadrature");
  c.expect(stats::benjamini_hochberg(std::vector<double>{0.01, 0.02, 0.03, 0.04}) ==
               std::vector<double>{0.04, 0.04, 0.04, 0.04},
           "BH step-up values");

  Rng g(9);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(5), b(5);
    for (double& x : a) x = 1.0 + 0.5 * g.normal();
    for (double& x : b) x = 1.4 + 0.7 * g.normal();
    const stats::TestResult t = stats::pooled_t(a, b);
    const auto tukey = stats::tukey_hsd({a, b});
    c.expect(std::fabs(tukey.at(0).result.statistic - std::sqrt(2.0) * std::fabs(t.statistic)) < 1e-9,
             "Tukey q = sqrt(2)|t|");
    std::vector<stats::Observation> obs;
    for (double x : a) obs.push_back({{"a"}, x});
    for (double x : b) obs.push_back({{"b"}, x});
    const double f = stats::anova({"group"}, obs).row("group").F;
    c.expect(std::fabs(f - t.statistic * t.statistic) < 1e-9, "ANOVA F = t^2");
  }
  c.expect(std::fabs(stats::studentized_range_critical(0.05, 3, 12) - 3.77) < 0.01, "q critical (3, 12)");
}

// 5
void metric_properties(Checks& c) {
  const Eigen::Vector3d a(0.3, 0.5, 0.2);
  c.expect(angular_error(a, a) < 1e-9, "parallel 0");
  c.expect(std::fabs(angular_error(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)) - 90.0) < 1e-9, "90");
  c.expect(std::fabs(angular_error(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0)) - 45.0) < 1e-9, "45");
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d x(rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1));
    const Eigen::Vector3d y(rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1));
    const double s = rng.uniform(0.1, 50.0), t = rng.uniform(0.1, 50.0);
    c.expect(std::fabs(angular_error(s * x, t * y) - angular_error(x, y)) < 1e-9, "scale invariance");
  }
  c.expect(summarize_errors(std::vector<double>{1, 2, 3}).trimean == 2.0, "trimean [1,2,3]");

  Eigen::VectorXd p(4), q(4), d1(4), d2(4);
  p << 0.1, 0.2, 0.3, 0.4;
  q << 0.4, 0.3, 0.2, 0.1;
  d1 << 0.5, 0.5, 0, 0;
  d2 << 0, 0, 0.3, 0.7;
  c.expect(jsd(p, p) == 0.0, "JSD(p, p) = 0");
  c.expect(jsd(p, q) > 0.0 && jsd(p, q) <= std::log(2.0), "JSD in (0, ln 2]");
  c.expect(std::fabs(jsd(d1, d2) - std::log(2.0)) < 1e-12, "disjoint JSD = ln 2");
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd u(5), v(5);
    for (int i = 0; i < 5; ++i) {
      u[i] = rng.uniform();
      v[i] = rng.uniform();
    }
    const double d = jsd(u, v);
    c.expect(d >= 0.0 && d <= std::log(2.0), "JSD bounds");
  }

  std::vector<SpatialMask> masks;
  for (int t = 0; t < 3; ++t) {
    SpatialMask m(5, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
    masks.push_back(m);
    c.expect(ssim(m, m) == 1.0, "SSIM(a, a) = 1");
  }
  SpatialMask l = SpatialMask::Zero(2, 2), r = SpatialMask::Zero(2, 2);
  l(0, 0) = 1.0;
  r(1, 1) = 1.0;
  c.expect(soft_iou(l, r) == 0.0, "disjoint soft IoU = 0");
  c.expect(spatial_divergence(masks, masks, DivergenceScale::Bounded) == 0.0, "spatial_divergence(A, A) = 0");
}

// 6
void model_zoo(Checks& c) {
  Rng rng(11);
  {
    const SpatialAttention m = SpatialAttention::make(4, rng);
    auto params = params_of(m);
    ad::Var x = testing::random_param(rng, {4, 5, 6});
    params.push_back(x);
    c.expect(max_grad_error(params, [&] { return probe(spatial_attention_forward(m, x), 1); }) < 1e-4,
             "spatial attention gradient");
  }
  {
    const TemporalAttention m = TemporalAttention::make(3, 3, 5, rng);
    auto params = params_of(m);
    std::vector<ad::Var> seq;
    for (int t = 0; t < 4; ++t) seq.push_back(testing::random_param(rng, {3, 2, 2}));
    HiddenState s{testing::random_param(rng, {3, 2, 2}), testing::random_param(rng, {3, 2, 2})};
    params.insert(params.end(), seq.begin(), seq.end());
    params.push_back(s.h);
    auto f = [&] {
      auto out = temporal_attention_forward(m, seq, s);
      return ad::add(probe(out.weights, 1), probe(out.combined, 2));
    };
    c.expect(max_grad_error(params, f) < 1e-4, "temporal attention gradient");
  }
  {
    const Encoder enc = Encoder::make(Backbone::Tiny, 4, true, rng);
    ad::Var frame = testing::random_param(rng, {3, 16, 16}, 0.5);
    auto params = params_of(enc);
    params.push_back(frame);
    auto f = [&] {
      ConfidenceOutput o = confidence_forward(enc, frame);
      return ad::add(probe(o.mask, 1), probe(o.features, 2));
    };
    c.expect(max_grad_error(params, f, 1e-6, 24) < 1e-4, "confidence gradient");
    std::vector<ad::Var> masks;
    for (int t = 0; t < 3; ++t) masks.push_back(testing::random_param(rng, {1, 3, 3}));
    c.expect(max_grad_error(masks, [&] { return probe(temporal_confidence_weights(masks), 1); }) < 1e-4,
             "temporal confidence gradient");
  }
  {
    const ConvLstmCell cell = ConvLstmCell::make(3, 4, 3, rng);
    auto params = params_of(cell);
    ad::Var x = testing::random_param(rng, {3, 4, 4});
    HiddenState s{testing::random_param(rng, {4, 4, 4}), testing::random_param(rng, {4, 4, 4})};
    params.push_back(x);
    params.push_back(s.h);
    params.push_back(s.c);
    auto f = [&] {
      HiddenState n = conv_lstm_step(cell, x, s);
      return ad::add(probe(n.h, 1), probe(n.c, 2));
    };
    c.expect(max_grad_error(params, f) < 1e-4, "ConvLSTM step gradient");
  }

  for (const std::string& label : {"A-S", "A-T", "A-ST", "C-S", "C-T", "C-ST", "CA-ST"}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Prediction p = predict(build_model(spec_from_label(label), s), random_sequence(100 + s, 4));
      for (const SpatialMask& m : p.capturedSpatialMasks)
        c.expect(m.minCoeff() >= 0.0 && m.maxCoeff() <= 1.0, label + " mask in [0, 1]");
      if (p.capturedTemporalWeights && spec_from_label(label).temporal_is_attention())
        c.expect(std::fabs(p.capturedTemporalWeights->weights.sum() - 1.0) < 1e-6, label + " weights sum to 1");
    }
  }

  {
    const SpatialAttention m = SpatialAttention::make(4, rng);
    zero_params(m);
    const SpatialMask mask = to_mask(spatial_attention_forward(m, testing::random_const(rng, {4, 3, 5})));
    c.expect((mask.array() == 0.5).all(), "zero-parameter masks are 0.5");
    const TemporalAttention t = TemporalAttention::make(3, 3, 4, rng);
    zero_params(t);
    std::vector<ad::Var> seq;
    for (int k = 0; k < 5; ++k) seq.push_back(testing::random_const(rng, {3, 2, 2}));
    HiddenState q{testing::random_const(rng, {3, 2, 2}), testing::random_const(rng, {3, 2, 2})};
    c.expect((temporal_attention_forward(t, seq, q).weights.value() == 1.0 / 5.0).all(),
             "zero-parameter attention is 1/T");
    const ConvLstmCell cell = ConvLstmCell::make(3, 4, 3, rng);
    zero_params(cell);
    const HiddenState out = conv_lstm_step(cell, testing::random_const(rng, {3, 4, 4}), zero_state(4, 4, 4));
    c.expect((out.h.value() == 0.0).all() && (out.c.value() == 0.0).all(), "zero-parameter ConvLSTM is 0");
  }
  c.expect(build_model(spec_from_label("A-ST"), 0).network().trainable_parameter_count() >
               build_model(spec_from_label("C-ST"), 0).network().trainable_parameter_count(),
           "A-ST has more parameters than C-ST");
}

// 7
bool valid_test_result(const nlohmann::json& r) {
  return r.is_object() && r["statistic"].is_number() && r["df"].is_number() && r["pValue"].is_number() &&
         r["pValue"].get<double>() >= 0.0 && r["pValue"].get<double>() <= 1.0 &&
         (r["adjustedP"].is_null() || r["adjustedP"].is_number()) &&
         (r["effectSize"].is_null() || r["effectSize"].is_number());
}

bool valid_verdict(const nlohmann::json& v, const std::string& test) {
  static const std::set<std::string> outcomes{"PASS", "FAIL", "INCONCLUSIVE"};
  if (!v.is_object() || !v["config"].is_string() || v["test"] != test || !v["outcome"].is_string() ||
      !outcomes.count(v["outcome"].get<std::string>()) || !v["comparisons"].is_array() ||
      !v["rationale"].is_string() || !v["decidedAtStep"].is_number_integer())
    return false;
  if (test == "WP1" && v["outcome"] == "INCONCLUSIVE") return false;
  if (v["outcome"] != "INCONCLUSIVE" && v["comparisons"].empty()) return false;
  for (const auto& cmp : v["comparisons"])
    if (!cmp["label"].is_string() || !valid_test_result(cmp["result"])) return false;
  if (!v["divergence"].is_null()) {
    const auto& d = v["divergence"];
    if (!d["temporal"].is_number() || !d["spatial"].is_number() || !d["spatiotemporal"].is_number()) return false;
  }
  return true;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FAITHFUL_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void desk_scale(Checks& c) {
  TempDir dir("acceptance_desk");
  SynthConfig sc;  // 16 sequences, T = 5, 32x32
  sc.mode = EvidenceMode::Global;
  const DatasetManifest m = kfold_split(write_synth(synth_generate(sc, 1), dir.path() / "global"), 4, 1);
  const std::vector<FrameSequence> train = load_sequences(m, m.train_ids(0));
  const std::vector<FrameSequence> test = load_sequences(m, m.fold_ids(0));
  TrainConfig tc = TrainConfig::desk();
  tc.epochs = 200;
  const ModelSpec spec = spec_from_label("C-S");
  c.expect(spec.backbone == Backbone::Tiny, "TINY backbone");

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train_model(spec, train, tc, 7);
  const double secs = seconds_since(t0);
  const double learned = mean_of(evaluate(r.model, test));
  const double uniform = mean_of(evaluate(freeze_uniform(r.model, SaliencyDims::Spatial, 3), test));
  std::cout << "  C-S GLOBAL: learned MAE " << learned << ", uniform MAE " << uniform << ", trained in " << secs
            << " s\n";
  c.expect(secs < 600.0, "(a) trains in under 10 min");
  c.expect(learned < 5.0, "(a) test MAE < 5 degrees");
  c.expect(uniform >= learned, "(b) uniform MAE >= learned MAE");

  const fs::path out = dir.path() / "campaign";
  nlohmann::json cfg = {
      {"seed", 5},
      {"outDir", out.string()},
      {"synth", {{"numSequences", 16}, {"frames", 5}, {"height", 32}, {"width", 32}, {"evidenceMode", "SPATIAL_PATCH"}}},
      {"train", {{"epochs", 100}}},
      {"campaign",
       {{"specs", {"A-S", "A-T", "A-ST", "C-S", "C-T", "C-ST", "CA-ST"}},
        {"folds", 4},
        {"calibrateSpatialThreshold", true}}}};
  const fs::path cfg_path = dir.path() / "campaign.json";
  write_file_atomic(cfg_path, cfg.dump(2));
  const fs::path log = dir.path() / "cli.log";

  const auto t1 = std::chrono::steady_clock::now();
  const int wp1 = run_cli("--config " + cfg_path.string() + " wp1", log);
  c.expect(wp1 == 0, "(c) wp1 campaign exits 0");
  const int wp2 = run_cli("--config " + cfg_path.string() + " wp2", log);
  c.expect(wp2 == 0, "(c) wp2 campaign exits 0");
  const int report = run_cli("--config " + cfg_path.string() + " report", log);
  c.expect(report == 0, "(c) report exits 0");
  std::cout << "  CLI campaigns finished in " << seconds_since(t1) << " s\n";
  if (wp1 != 0 || wp2 != 0 || report != 0) {
    std::cout << slurp(log);
    return;
  }

  for (const std::string test : {"WP1", "WP2"}) {
    const std::string stem = test == "WP1" ? "wp1" : "wp2";
    const nlohmann::json verdicts = nlohmann::json::parse(slurp(out / "verdicts" / (stem + ".json")));
    std::set<std::string> configs;
    for (const auto& v : verdicts["verdicts"]) {
      c.expect(valid_verdict(v, test), "(c) schema-valid " + test + " verdict");
      configs.insert(v.value("config", ""));
    }
    c.expect(configs.size() == 7, "(c) one " + test + " verdict per spec");
    c.expect(fs::exists(out / (stem + ".json")) && fs::exists(out / (stem + ".txt")), "(c) " + test + " report files");
  }
  const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
  c.expect(rep["rows"].is_array() && rep["rows"].size() == 7, "(c) summary report rows");
  c.expect(!slurp(out / "report.txt").empty(), "(c) text report");
  std::cout << slurp(out / "report.txt");
}

// 8
void reproducibility(Checks& c) {
  TempDir dir("acceptance_repro");
  SynthConfig sc;
  sc.numSequences = 4;
  sc.mode = EvidenceMode::KeyFrame;
  const SynthDataset d = synth_generate(sc, 2);
  const std::vector<FrameSequence> train(d.sequences.begin(), d.sequences.begin() + 3);
  const std::vector<FrameSequence> test(d.sequences.begin() + 3, d.sequences.end());
  TrainConfig tc = TrainConfig::desk();
  tc.epochs = 10;
  const TrainResult a = train_model(spec_from_label("C-ST"), train, tc, 3);
  const TrainResult b = train_model(spec_from_label("C-ST"), train, tc, 3);
  c.expect(evaluate(a.model, test) == evaluate(b.model, test), "training MAE");

  Rng r1(4), r2(4);
  const FrameSequence x = augment(d.sequences[0], r1), y = augment(d.sequences[0], r2);
  bool same = x.frames.size() == y.frames.size();
  for (std::size_t t = 0; same && t < x.frames.size(); ++t) same = x.frames[t] == y.frames[t];
  c.expect(same, "augmentation");

  const Prediction f1 = predict(freeze_uniform(a.model, SaliencyDims::SpatioTemporal, 8), test[0]);
  const Prediction f2 = predict(freeze_uniform(b.model, SaliencyDims::SpatioTemporal, 8), test[0]);
  c.expect(f1.capturedSpatialMasks == f2.capturedSpatialMasks && f1.capturedTemporalWeights == f2.capturedTemporalWeights,
           "frozen masks");

  const Prediction p = predict(a.model, test[0]);
  render_heatmap(test[0].frames.back(), p.capturedSpatialMasks.back(), dir.path() / "h1.png");
  render_heatmap(test[0].frames.back(), predict(b.model, test[0]).capturedSpatialMasks.back(), dir.path() / "h2.png");
  c.expect(slurp(dir.path() / "h1.png") == slurp(dir.path() / "h2.png"), "heatmap files");

  const ResultsStore store(dir.path() / "store");
  RunRecord rec;
  rec.runId = "C-ST/fold0/learned";
  rec.spec = spec_from_label("C-ST");
  rec.itemIds = {test[0].id};
  rec.perItemErrors = evaluate(a.model, test);
  rec.summary = summarize_errors(rec.perItemErrors);
  rec.seeds = {{"init", 3}};
  rec.wallTimeSeconds = 0.1;
  store.put(rec);
  export_results(store, {rec.runId}, ExportFormat::Json, dir.path() / "export.json");
  c.expect(import_results_json(dir.path() / "export.json") == std::vector<RunRecord>{rec}, "export/import");

  for (DType dt : {DType::F32, DType::F64}) {
    const Tensor t = image_to_tensor(d.sequences[1].frames[2], dt);
    save_tensor(dir.path() / "t.tensor", t);
    const Tensor back = load_tensor(dir.path() / "t.tensor");
    c.expect(back.shape == t.shape && back.dtype == t.dtype &&
                 std::memcmp(back.data.data(), t.data.data(), sizeof(double) * t.data.size()) == 0,
             "tensor round-trip");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Checks&)>> criteria{
      {"WP1 replay", wp1_replay},
      {"WP2 replay", wp2_replay},
      {"baseline-accuracy replay", baseline_replay},
      {"statistics oracle equivalence", statistics_oracles},
      {"metric property suite", metric_properties},
      {"model-zoo numerical checks", model_zoo},
      {"desk-scale end-to-end", desk_scale},
      {"reproducibility and IO", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Checks c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << i + 1 << ": " << (c.ok() ? "PASS" : "FAIL") << "  " << criteria[i].first << "\n";
    for (const std::string& f : c.failures()) std::cout << "    failed: " << f << "\n";
    std::cout.flush();
    failed += !c.ok();
  }
  return failed == 0 ? 0 : 1;
}
