#include "faithful/campaign.hpp"
#include "faithful/checkpoint.hpp"
#include "faithful/config.hpp"
#include "faithful/dataset.hpp"
#include "faithful/error.hpp"
#include "faithful/heatmap.hpp"
#include "faithful/image.hpp"
#include "faithful/replay.hpp"
#include "faithful/synth.hpp"
#include "faithful/tensor_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace faithful;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string outDir;
};

CampaignConfig resolve(const Globals& g, bool reuse_campaign_json = false) {
  CampaignConfig c;
  if (!g.config.empty()) {
    c = load_config(g.config);
  } else if (reuse_campaign_json) {
    const fs::path echo = fs::path(g.outDir.empty() ? c.outDir : fs::path(g.outDir)) / "campaign.json";
    if (fs::exists(echo)) c = load_config(echo);
  }
  if (g.seed) c.seed = *g.seed;
  if (!g.outDir.empty()) c.outDir = g.outDir;
  return c;
}

void progress(const std::string& msg) { std::cerr << msg << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saliency faithfulness tests for temporal colour constancy models"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--out-dir", g.outDir, "Output directory (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic planted-evidence dataset into --out-dir");
  std::optional<int> sequences, frames, height, width, patch;
  std::string mode;
  synth->add_option("--sequences", sequences);
  synth->add_option("--frames", frames);
  synth->add_option("--height", height);
  synth->add_option("--width", width);
  synth->add_option("--mode", mode, "GLOBAL, SPATIAL_PATCH or KEY_FRAME");
  synth->add_option("--patch-size", patch);

  auto* train = app.add_subcommand("train", "Train one spec on every fold but --fold and record it");
  std::string spec_label;
  int fold = 0;
  std::string dataset;
  std::optional<int> epochs;
  std::optional<double> lr;
  train->add_option("--spec", spec_label, "Config label, e.g. C-S or B")->required();
  train->add_option("--fold", fold, "Held-out fold");
  train->add_option("--dataset", dataset, "Dataset root (default: config, else synthetic)");
  train->add_option("--epochs", epochs);
  train->add_option("--lr", lr);

  auto* wp1 = app.add_subcommand("wp1", "Run or resume the WP1 campaign");
  auto* wp2 = app.add_subcommand("wp2", "Run or resume the WP2 campaign");

  auto* replay = app.add_subcommand("replay", "Verdicts from published summary statistics");
  std::string which = "all";
  replay->add_option("--test", which, "wp1, wp2 or all")->check(CLI::IsMember({"wp1", "wp2", "all"}));

  auto* report = app.add_subcommand("report", "Regenerate reports from persisted run records");
  std::string export_format, export_path;
  std::vector<std::string> export_runs;
  report->add_option("--export", export_format, "Also export run records: json or csv");
  report->add_option("--export-path", export_path, "Export file (default <out-dir>/runs.<format>)");
  report->add_option("--runs", export_runs, "Run ids to export (default: all)");

  auto* heatmap = app.add_subcommand("heatmap", "Render a spatial saliency heatmap over a frame");
  std::string ckpt, sequence, mask_file, frame_file, out_png;
  std::optional<int> frame_index;
  heatmap->add_option("--checkpoint", ckpt, "Model checkpoint");
  heatmap->add_option("--dataset", dataset, "Dataset root holding --sequence");
  heatmap->add_option("--sequence", sequence, "Sequence id");
  heatmap->add_option("--mask", mask_file, "Spatial mask tensor file instead of a checkpoint");
  heatmap->add_option("--frame-file", frame_file, "Frame image (.png or .tensor) for --mask");
  heatmap->add_option("--frame", frame_index, "Frame index (default: last)");
  heatmap->add_option("--out", out_png, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      CampaignConfig c = resolve(g);
      if (sequences) c.synth.numSequences = *sequences;
      if (frames) c.synth.frames = *frames;
      if (height) c.synth.height = *height;
      if (width) c.synth.width = *width;
      if (!mode.empty()) c.synth.mode = parse_evidence_mode(mode);
      if (patch) c.synth.patchSize = *patch;
      const fs::path root = g.outDir.empty() ? fs::path("data") : fs::path(g.outDir);
      const DatasetManifest m = write_synth(synth_generate(c.synth, c.seed), root);
      std::printf("wrote %zu sequences to %s\n", m.ids.size(), root.string().c_str());
    } else if (*train) {
      CampaignConfig c = resolve(g);
      if (!dataset.empty()) c.dataset = dataset;
      if (epochs) c.train.epochs = *epochs;
      if (lr) c.train.learningRate = *lr;
      c.train.validate();
      ModelSpec spec = c.model;
      const ModelSpec parsed = spec_from_label(spec_label);
      spec.type = parsed.type;
      spec.dims = parsed.dims;
      spec.validate();
      if (fold < 0 || fold >= c.folds) throw InputError("--fold must lie in [0, " + std::to_string(c.folds) + ")");
      const ResultsStore store(c.outDir);
      const DatasetManifest m = prepare_dataset(c);
      const RunRecord r = train_and_record(c, store, m, spec, fold, progress);
      std::printf("%s  n=%zu  mean=%.3f  median=%.3f  trimean=%.3f  worst25=%.3f\n", r.runId.c_str(), r.summary.n,
                  r.summary.mean, r.summary.median, r.summary.trimean, r.summary.worst25);
    } else if (*wp1) {
      const Wp1Result r = run_wp1(resolve(g), progress);
      std::fputs(r.report.text.c_str(), stdout);
    } else if (*wp2) {
      const Wp2Result r = run_wp2(resolve(g), progress);
      std::fputs(r.report.text.c_str(), stdout);
    } else if (*replay) {
      const CampaignConfig c = resolve(g);
      const ReplayResult r = which == "wp1" ? replay_wp1(c.alpha) : which == "wp2" ? replay_wp2(c.alpha)
                                                                                 : replay_all(c.alpha);
      nlohmann::json verdicts = nlohmann::json::array();
      for (const VerdictRecord& v : r.verdicts) verdicts.push_back(v);
      nlohmann::json accuracy = nlohmann::json::array();
      for (const AccuracyComparison& a : r.accuracy) accuracy.push_back(a);
      Report out = r.report;
      out.json["verdicts"] = nlohmann::ordered_json::parse(verdicts.dump());
      out.json["accuracy"] = nlohmann::ordered_json::parse(accuracy.dump());
      write_report(out, c.outDir / ("replay-" + which));
      std::fputs(r.report.text.c_str(), stdout);
    } else if (*report) {
      const CampaignConfig c = resolve(g, true);
      const Report r = regenerate_report(c);
      std::fputs(r.text.c_str(), stdout);
      if (!export_format.empty()) {
        const ExportFormat f = parse_export_format(export_format);
        const ResultsStore store(c.outDir);
        const std::vector<std::string> ids = export_runs.empty() ? store.list() : export_runs;
        const fs::path path = export_path.empty()
                                  ? c.outDir / (f == ExportFormat::Json ? "runs.json" : "runs.csv")
                                  : fs::path(export_path);
        export_results(store, ids, f, path);
        std::printf("exported %zu runs to %s\n", ids.size(), path.string().c_str());
      }
    } else if (*heatmap) {
      Image frame;
      SpatialMask mask;
      if (!mask_file.empty()) {
        if (frame_file.empty()) throw InputError("--mask needs --frame-file");
        const auto masks = load_spatial_masks(mask_file);
        const int t = frame_index.value_or(static_cast<int>(masks.size()) - 1);
        if (t < 0 || t >= static_cast<int>(masks.size())) throw InputError("--frame out of range");
        mask = masks[static_cast<std::size_t>(t)];
        frame = read_frame(frame_file);
      } else {
        if (ckpt.empty() || dataset.empty() || sequence.empty())
          throw InputError("heatmap needs --checkpoint, --dataset and --sequence (or --mask and --frame-file)");
        const Checkpoint ck = load_checkpoint(ckpt);
        if (!ck.model.spec().has_spatial()) throw InputError("model " + ck.model.spec().label() + " has no spatial saliency");
        const DatasetLoad load = load_dataset(dataset);
        const FrameSequence seq = load_sequence(load.manifest, sequence);
        const Prediction p = predict(ck.model, seq);
        const int t = frame_index.value_or(static_cast<int>(seq.frames.size()) - 1);
        if (t < 0 || t >= static_cast<int>(seq.frames.size())) throw InputError("--frame out of range");
        mask = p.capturedSpatialMasks[static_cast<std::size_t>(t)];
        frame = seq.frames[static_cast<std::size_t>(t)];
      }
      render_heatmap(frame, mask, out_png);
      std::printf("wrote %s\n", out_png.c_str());
    }
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
