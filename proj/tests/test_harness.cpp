#include "support.hpp"

#include "faithful/campaign.hpp"
#include "faithful/checkpoint.hpp"
#include "faithful/error.hpp"
#include "faithful/heatmap.hpp"
#include "faithful/image.hpp"
#include "faithful/results.hpp"
#include "faithful/synth.hpp"
#include "faithful/tensor_io.hpp"
#include "faithful/train.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace faithful;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SynthDataset small_synth(EvidenceMode mode, int n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.numSequences = n;
  cfg.mode = mode;
  return synth_generate(cfg, seed);
}

TrainConfig quick(int epochs) {
  TrainConfig t = TrainConfig::desk();
  t.epochs = epochs;
  return t;
}

CampaignConfig small_campaign(const fs::path& out) {
  CampaignConfig c;
  c.seed = 11;
  c.outDir = out;
  c.synth.numSequences = 8;
  c.synth.height = 16;
  c.synth.width = 16;
  c.synth.mode = EvidenceMode::SpatialPatch;
  c.synth.patchSize = 6;
  c.train = quick(3);
  c.specs = {"C-S", "A-T"};
  c.folds = 2;
  c.spatialThreshold = 0.3;
  return c;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FAITHFUL_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunRecord sample_record() {
  RunRecord r;
  r.runId = "C-S/fold0/learned";
  r.spec = spec_from_label("C-S");
  r.weightSource = WeightSource::learned();
  r.fold = 0;
  r.itemIds = {"a", "b", "c"};
  r.perItemErrors = {1.5, 2.25, 0.125};
  r.summary = summarize_errors(r.perItemErrors);
  r.maskRefs = {"masks/x/a.spatial.tensor"};
  r.wallTimeSeconds = 0.5;
  r.seeds = {{"init", 7}, {"train", 18446744073709551615ull}};
  return r;
}

}  // namespace

TEST_CASE("training overfits a single sequence") {
  const FrameSequence seq = small_synth(EvidenceMode::Global, 1, 1).sequences[0];
  TrainConfig cfg = quick(200);
  cfg.augment = false;
  const TrainResult r = train_model(spec_from_label("C-S"), {seq}, cfg, 5);
  CHECK(r.epochLoss.size() == 200);
  CHECK(r.epochLoss.back() < r.epochLoss.front());
  CHECK(evaluate(r.model, {seq})[0] < 1.0);
}

TEST_CASE("training is deterministic for fixed seeds") {
  const SynthDataset d = small_synth(EvidenceMode::Global, 4, 2);
  const std::vector<FrameSequence> train(d.sequences.begin(), d.sequences.begin() + 3);
  const std::vector<FrameSequence> test(d.sequences.begin() + 3, d.sequences.end());
  const TrainResult a = train_model(spec_from_label("A-ST"), train, quick(5), 9);
  const TrainResult b = train_model(spec_from_label("A-ST"), train, quick(5), 9);
  CHECK(a.epochLoss == b.epochLoss);
  CHECK(evaluate(a.model, test) == evaluate(b.model, test));
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig t = quick(0);
  CHECK_THROWS_AS(t.validate(), ConfigurationError);
  t = quick(1);
  t.optimizer = "ADAM";
  CHECK_THROWS_AS(t.validate(), ConfigurationError);
}

TEST_CASE("checkpoints restore identical predictions") {
  TempDir dir("ckpt");
  const SynthDataset d = small_synth(EvidenceMode::KeyFrame, 2, 3);
  for (const std::string& label : {"A-ST", "C-S", "CA-ST"}) {
    CAPTURE(label);
    const Model m = build_model(spec_from_label(label), 4);
    const fs::path p = dir.path() / (label + ".ckpt");
    save_checkpoint(p, m, 4, {{"note", "x"}});
    const Checkpoint c = load_checkpoint(p);
    CHECK(c.seed == 4);
    CHECK(c.meta["note"] == "x");
    CHECK(c.model.spec() == m.spec());
    const Prediction a = predict(m, d.sequences[0]), b = predict(c.model, d.sequences[0]);
    CHECK(a.illuminant == b.illuminant);
    CHECK(a.capturedSpatialMasks == b.capturedSpatialMasks);
    CHECK(a.capturedTemporalWeights == b.capturedTemporalWeights);
  }
  write_file_atomic(dir.path() / "bad.ckpt", "{\"format\": \"other\"}\n");
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), PersistenceError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "none.ckpt"), PersistenceError);
}

TEST_CASE("run records round-trip through the store and exports") {
  TempDir dir("store");
  const ResultsStore store(dir.path());
  const RunRecord r = sample_record();
  store.put(r);
  CHECK(store.has(r.runId));
  CHECK(store.get(r.runId) == r);
  CHECK(store.list() == std::vector<std::string>{r.runId});
  CHECK_THROWS_AS(store.get("nope/fold0/learned"), LookupError);

  export_results(store, {r.runId}, ExportFormat::Json, dir.path() / "out.json");
  CHECK(import_results_json(dir.path() / "out.json") == std::vector<RunRecord>{r});
  export_results(store, {r.runId}, ExportFormat::Csv, dir.path() / "out.csv");
  std::istringstream csv(slurp(dir.path() / "out.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header.find("runId") != std::string::npos);
  CHECK(row.find("C-S/fold0/learned") != std::string::npos);
  CHECK_FALSE(std::getline(csv, extra));
  CHECK_THROWS_AS(export_results(store, {"missing"}, ExportFormat::Csv, dir.path() / "x.csv"), LookupError);
  CHECK_THROWS_AS(parse_export_format("xml"), ConfigurationError);

  nlohmann::json j = r;
  j["summary"]["mean"] = 99.0;
  write_file_atomic(store.record_path(r.runId), j.dump());
  CHECK_THROWS_AS(store.get(r.runId), PersistenceError);
}

TEST_CASE("heatmap overlay of a zero mask blends the lowest colour") {
  Image frame(3, 6, 5);
  for (Eigen::Index i = 0; i < frame.data.size(); ++i) frame.data[i] = (i % 7) / 7.0;
  const Image out = heatmap_overlay(frame, SpatialMask::Zero(2, 2));
  CHECK(out.height == 6);
  CHECK(out.width == 5);
  const Eigen::Vector3d v0(0.267004, 0.004874, 0.329415);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x) CHECK(out.at(c, y, x) == doctest::Approx(0.5 * frame.at(c, y, x) + 0.5 * v0[c]).epsilon(1e-5));
  CHECK(viridis(1.0).isApprox(Eigen::Vector3d(0.993248, 0.906157, 0.143936), 1e-5));
  CHECK(viridis(2.0) == viridis(1.0));
}

TEST_CASE("heatmap files are byte-identical across renders") {
  TempDir dir("heat");
  Rng rng(1);
  Image frame(3, 16, 16);
  for (auto& v : frame.data) v = rng.uniform();
  SpatialMask m(4, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
  render_heatmap(frame, m, dir.path() / "a.png");
  render_heatmap(frame, m, dir.path() / "b.png");
  CHECK(slurp(dir.path() / "a.png") == slurp(dir.path() / "b.png"));
  CHECK(png_size(dir.path() / "a.png") == std::pair{16, 16});
  write_file_atomic(dir.path() / "file", "x");
  CHECK_THROWS_AS(render_heatmap(frame, m, dir.path() / "file" / "c.png"), PersistenceError);
}

TEST_CASE("campaigns resume and reports regenerate from records alone") {
  TempDir dir("campaign");
  const CampaignConfig cfg = small_campaign(dir.path() / "out");
  const Wp1Result first = run_wp1(cfg);
  CHECK(first.verdicts.size() == 2);
  const ResultsStore store(cfg.outDir);
  const std::string rid = run_id("C-S", 1, RunRole::Uniform);
  REQUIRE(store.has(rid));
  const std::string before = slurp(store.record_path(rid));
  const std::string wp1_before = slurp(cfg.outDir / "wp1.json");

  int skipped = 0, trained = 0;
  run_wp1(cfg, [&](const std::string& msg) {
    if (msg.rfind("skip", 0) == 0) ++skipped;
    if (msg.rfind("train", 0) == 0) ++trained;
  });
  CHECK(skipped == 10);
  CHECK(trained == 0);
  CHECK(slurp(store.record_path(rid)) == before);
  CHECK(slurp(cfg.outDir / "wp1.json") == wp1_before);

  const Wp2Result wp2 = run_wp2(cfg);
  CHECK(wp2.verdicts.size() == 2);
  const Report r1 = regenerate_report(cfg);
  const std::string report_json = slurp(cfg.outDir / "report.json");
  const Report r2 = regenerate_report(cfg);
  CHECK(slurp(cfg.outDir / "report.json") == report_json);
  CHECK(r1.text == r2.text);
  CHECK(slurp(cfg.outDir / "wp1.json") == wp1_before);
  CHECK(r1.json["rows"].size() == 2);

  fs::remove(store.record_path(run_id("A-T", 0, RunRole::Learned)));
  CHECK_THROWS_AS(wp1_report(cfg, store), LookupError);
  CHECK_THROWS_AS(regenerate_report(cfg), LookupError);
}

TEST_CASE("campaigns without checkpoints fail when training is disabled") {
  TempDir dir("no_train");
  CampaignConfig cfg = small_campaign(dir.path() / "out");
  cfg.trainMissing = false;
  CHECK_THROWS_AS(run_wp1(cfg), OrchestrationError);
}

TEST_CASE("campaign config validation and file loading") {
  TempDir dir("cfg");
  CampaignConfig c = small_campaign(dir.path());
  c.specs = {"B"};
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
  c.specs = {"C-S", "C-S"};
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
  c.specs = {"C-S"};
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigurationError);

  const CampaignConfig ok = small_campaign(dir.path() / "o");
  write_file_atomic(dir.path() / "c.json", nlohmann::json(ok).dump());
  const CampaignConfig back = load_config(dir.path() / "c.json");
  CHECK(nlohmann::json(back) == nlohmann::json(ok));
  write_file_atomic(dir.path() / "bad.json", R"({"sede": 1})");
  CHECK_THROWS_AS(load_config(dir.path() / "bad.json"), ConfigurationError);
  write_file_atomic(dir.path() / "nested.json", R"({"synth": {"mode": "GLOBAL"}})");
  CHECK_THROWS_AS(load_config(dir.path() / "nested.json"), ConfigurationError);
  write_file_atomic(dir.path() / "saliency.json", R"({"model": {"saliencyType": "A"}})");
  CHECK_THROWS_AS(load_config(dir.path() / "saliency.json"), ConfigurationError);
  write_file_atomic(dir.path() / "broken.json", "{");
  CHECK_THROWS_AS(load_config(dir.path() / "broken.json"), ConfigurationError);
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cli");
  const std::string out = " --out-dir " + (dir.path() / "o").string();
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("--config " + (dir.path() / "missing.json").string() + " wp1") == 1);
  CHECK(run_cli(out + " replay --test wp1") == 0);
  CHECK(fs::exists(dir.path() / "o" / "replay-wp1.json"));
  CHECK(run_cli(out + " replay --test wp3") == 1);
  CHECK(run_cli(out + " train --spec Q-S --fold 0") == 1);
  CHECK(run_cli(" --out-dir " + (dir.path() / "empty").string() + " report") != 0);

  write_file_atomic(dir.path() / "bad.json", R"({"campaign": {"folds": 1}})");
  CHECK(run_cli("--config " + (dir.path() / "bad.json").string() + " wp1") == 1);

  CHECK(run_cli(" --out-dir " + (dir.path() / "data").string() + " synth --sequences 2 --frames 2 --height 8 --width 8") == 0);
  CHECK(load_dataset(dir.path() / "data").manifest.ids.size() == 2);
}
