#include "faithful/campaign.hpp"

#include "faithful/checkpoint.hpp"
#include "faithful/error.hpp"
#include "faithful/interventions.hpp"
#include "faithful/rng.hpp"
#include "faithful/synth.hpp"
#include "faithful/tensor_io.hpp"
#include "faithful/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace faithful {

namespace fs = std::filesystem;

std::string_view to_string(RunRole r) {
  switch (r) {
    case RunRole::Learned: return "learned";
    case RunRole::Uniform: return "uniform";
    case RunRole::NcOwn: return "nc-own";
    case RunRole::NcTransplanted: return "nc-transplanted";
    case RunRole::Calibration: return "calibration";
  }
  return "?";
}

std::string run_id(const std::string& label, int fold, RunRole role) {
  return label + "/fold" + std::to_string(fold) + "/" + std::string(to_string(role));
}

std::string checkpoint_name(const std::string& label, int fold, RunRole role) {
  std::string net = "contextual";
  if (role == RunRole::NcOwn || role == RunRole::NcTransplanted) net = "non-contextual";
  if (role == RunRole::Calibration) net = "calibration";
  return label + "/fold" + std::to_string(fold) + "/" + net;
}

namespace {

using Clock = std::chrono::steady_clock;

void say(const Progress& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::uint64_t split_seed(const CampaignConfig& c) { return derive_seed(c.seed, hash_string("split")); }
std::uint64_t synth_seed(const CampaignConfig& c) { return derive_seed(c.seed, hash_string("synth")); }
std::uint64_t freeze_seed(const CampaignConfig& c) { return derive_seed(c.seed, hash_string("freeze")); }
std::uint64_t init_seed(const CampaignConfig& c, const std::string& ckpt) {
  return derive_seed(c.seed, hash_string(ckpt + "/init"));
}
std::uint64_t train_seed(const CampaignConfig& c, const std::string& ckpt) {
  return derive_seed(derive_seed(c.seed, c.train.seed), hash_string(ckpt + "/train"));
}

ModelSpec role_spec(const ModelSpec& spec, RunRole role) {
  return role == RunRole::NcOwn || role == RunRole::NcTransplanted ? non_contextual_variant(spec) : spec;
}

nlohmann::ordered_json ordered(const nlohmann::json& j) { return nlohmann::ordered_json::parse(j.dump()); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string p_text(const stats::TestResult& r) { return fmt("%.4g", r.adjustedP.value_or(r.pValue)); }

// Per-item masks persisted next to a run record.
struct ItemMasks {
  std::vector<SpatialMask> spatial;
  std::optional<TemporalWeights> temporal;
};

std::vector<std::string> save_masks(const ResultsStore& store, const std::string& rid, const std::string& item,
                                    const ItemMasks& m) {
  std::vector<std::string> refs;
  const fs::path dir = store.mask_dir(rid);
  if (!m.spatial.empty()) {
    const fs::path p = dir / (item + ".spatial.tensor");
    save_spatial_masks(p, m.spatial);
    refs.push_back(fs::relative(p, store.root()).generic_string());
  }
  if (m.temporal) {
    const fs::path p = dir / (item + ".temporal.tensor");
    save_temporal_weights(p, *m.temporal);
    refs.push_back(fs::relative(p, store.root()).generic_string());
  }
  return refs;
}

ItemMasks load_masks(const ResultsStore& store, const RunRecord& r, const std::string& item) {
  ItemMasks m;
  bool found = false;
  for (const std::string& ref : r.maskRefs) {
    const fs::path p = store.root() / ref;
    if (p.filename() == item + ".spatial.tensor") {
      if (!fs::exists(p)) throw LookupError("run '" + r.runId + "' references missing mask " + p.string());
      m.spatial = load_spatial_masks(p);
      found = true;
    } else if (p.filename() == item + ".temporal.tensor") {
      if (!fs::exists(p)) throw LookupError("run '" + r.runId + "' references missing mask " + p.string());
      m.temporal = load_temporal_weights(p, r.spec.temporal_is_attention());
      found = true;
    }
  }
  if (!found) throw LookupError("run '" + r.runId + "' has no masks for item '" + item + "'");
  return m;
}

class Runner {
 public:
  Runner(const CampaignConfig& cfg, Progress progress)
      : cfg_(cfg), store_(cfg.outDir), progress_(std::move(progress)) {
    cfg_.validate();
    write_file_atomic(cfg_.outDir / "campaign.json", nlohmann::json(cfg_).dump(2) + "\n");
    manifest_ = prepare_dataset(cfg_);
  }

  const ResultsStore& store() const { return store_; }

  Model model(const ModelSpec& spec, int fold, RunRole role) {
    const std::string key = checkpoint_name(spec.label(), fold, role);
    if (auto it = models_.find(key); it != models_.end()) return it->second;
    Model m = obtain_model(cfg_, store_, manifest_, spec, fold, role, progress_);
    models_.emplace(key, m);
    return m;
  }

  const std::vector<FrameSequence>& test_set(int fold) {
    auto it = test_sets_.find(fold);
    if (it == test_sets_.end())
      it = test_sets_.emplace(fold, load_sequences(manifest_, manifest_.fold_ids(fold))).first;
    return it->second;
  }

  // Evaluates `make(seq)` on every test item and persists the record.
  template <typename Make>
  void record(const ModelSpec& spec, int fold, RunRole role, const WeightSource& source,
              const std::map<std::string, std::uint64_t>& seeds, Make make) {
    const std::string rid = run_id(spec.label(), fold, role);
    if (store_.has(rid)) {
      say(progress_, "skip " + rid + " (recorded)");
      return;
    }
    const auto& seqs = test_set(fold);
    const auto start = Clock::now();
    RunRecord r;
    r.runId = rid;
    r.spec = role_spec(spec, role);
    r.weightSource = source;
    r.fold = fold;
    r.seeds = seeds;
    for (const FrameSequence& seq : seqs) {
      const Model m = make(seq);
      const Prediction p = predict(m, seq);
      r.itemIds.push_back(seq.id);
      r.perItemErrors.push_back(angular_error(p.illuminant, seq.illuminant));
      const auto refs = save_masks(store_, rid, seq.id, {p.capturedSpatialMasks, p.capturedTemporalWeights});
      r.maskRefs.insert(r.maskRefs.end(), refs.begin(), refs.end());
    }
    r.summary = summarize_errors(r.perItemErrors);
    r.wallTimeSeconds = std::chrono::duration<double>(Clock::now() - start).count();
    store_.put(r);
    say(progress_, "recorded " + rid + fmt(" MAE %.3f", r.mae()));
  }

  std::map<std::string, std::uint64_t> seeds(const ModelSpec& spec, int fold, RunRole role) const {
    const std::string ck = checkpoint_name(spec.label(), fold, role);
    return {{"split", split_seed(cfg_)}, {"init", init_seed(cfg_, ck)}, {"train", train_seed(cfg_, ck)}};
  }

  void learned(const ModelSpec& spec, int fold) {
    record(spec, fold, RunRole::Learned, WeightSource::learned(), seeds(spec, fold, RunRole::Learned),
           [&](const FrameSequence&) { return model(spec, fold, RunRole::Learned); });
  }

  void uniform(const ModelSpec& spec, int fold) {
    auto s = seeds(spec, fold, RunRole::Learned);
    s["freeze"] = freeze_seed(cfg_);
    record(spec, fold, RunRole::Uniform, WeightSource::uniform_frozen(freeze_seed(cfg_)), s,
           [&](const FrameSequence&) {
             return freeze_uniform(model(spec, fold, RunRole::Learned), spec.dims, freeze_seed(cfg_));
           });
  }

  void nc_own(const ModelSpec& spec, int fold) {
    record(spec, fold, RunRole::NcOwn, WeightSource::learned(), seeds(spec, fold, RunRole::NcOwn),
           [&](const FrameSequence&) { return model(spec, fold, RunRole::NcOwn); });
  }

  void nc_transplanted(const ModelSpec& spec, int fold) {
    const std::string donor = run_id(spec.label(), fold, RunRole::Learned);
    auto s = seeds(spec, fold, RunRole::NcTransplanted);
    const auto donor_seeds = seeds(spec, fold, RunRole::Learned);
    s["donorInit"] = donor_seeds.at("init");
    record(spec, fold, RunRole::NcTransplanted, WeightSource::transplanted(donor), s,
           [&](const FrameSequence& seq) {
             const Model host = model(spec, fold, RunRole::NcTransplanted);
             const Model contextual = model(spec, fold, RunRole::Learned);
             try {
               return transplant(host, capture_masks(contextual, seq), donor);
             } catch (const ConfigurationError& e) {
               throw OrchestrationError("transplant into '" + run_id(spec.label(), fold, RunRole::NcTransplanted) +
                                        "' failed: " + e.what());
             } catch (const ShapeError& e) {
               throw OrchestrationError("transplant into '" + run_id(spec.label(), fold, RunRole::NcTransplanted) +
                                        "' failed: " + e.what());
             }
           });
  }

  void calibration(const ModelSpec& spec, int fold) {
    record(spec, fold, RunRole::Calibration, WeightSource::learned(), seeds(spec, fold, RunRole::Calibration),
           [&](const FrameSequence&) { return model(spec, fold, RunRole::Calibration); });
  }

 private:
  CampaignConfig cfg_;
  ResultsStore store_;
  Progress progress_;
  DatasetManifest manifest_;
  std::map<std::string, Model> models_;
  std::map<int, std::vector<FrameSequence>> test_sets_;
};

std::vector<double> fold_maes(const ResultsStore& store, const std::string& label, const std::vector<int>& folds,
                              RunRole role) {
  std::vector<double> out;
  for (int f : folds) out.push_back(store.get(run_id(label, f, role)).mae());
  return out;
}

std::string verdict_line(const VerdictRecord& v) {
  std::ostringstream s;
  s << v.config.label() << "  " << to_string(v.test) << " " << to_string(v.outcome) << " (step "
    << v.decidedAtStep << ")";
  for (const Comparison& c : v.comparisons) {
    s << "; " << c.label << ": t=" << fmt("%.3f", c.result.statistic) << " p=" << p_text(c.result);
    if (c.result.effectSize) s << " d=" << fmt("%.2f", *c.result.effectSize);
  }
  if (v.divergence)
    s << "; div temporal=" << fmt("%.4g", v.divergence->temporal) << " spatial=" << fmt("%.4g", v.divergence->spatial);
  s << "\n    " << v.rationale << "\n";
  return s.str();
}

nlohmann::ordered_json verdicts_json(const std::vector<VerdictRecord>& vs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const VerdictRecord& v : vs) arr.push_back(v);
  return ordered(arr);
}

std::optional<double> calibrated_spatial_threshold(const CampaignConfig& cfg, const ResultsStore& store) {
  std::vector<double> divs;
  for (const ModelSpec& spec : cfg.model_specs()) {
    if (!spec.has_spatial()) continue;
    for (int f : cfg.fold_list()) {
      const RunRecord a = store.get(run_id(spec.label(), f, RunRole::Learned));
      const RunRecord b = store.get(run_id(spec.label(), f, RunRole::Calibration));
      for (const std::string& item : a.itemIds) {
        const ItemMasks ma = load_masks(store, a, item);
        const ItemMasks mb = load_masks(store, b, item);
        divs.push_back(spatial_divergence(ma.spatial, mb.spatial, cfg.divergenceScale));
      }
    }
  }
  if (divs.empty()) return std::nullopt;
  std::sort(divs.begin(), divs.end());
  return quantile_sorted(divs, 0.10);
}

ModelSpec baseline_spec(const CampaignConfig& cfg) {
  ModelSpec b = cfg.model;
  b.type = SaliencyType::None;
  b.dims = SaliencyDims::None;
  return b;
}

bool needs_spatial_threshold(const CampaignConfig& cfg) {
  for (const ModelSpec& s : cfg.model_specs())
    if (s.has_spatial()) return true;
  return false;
}

}  // namespace

DatasetManifest prepare_dataset(const CampaignConfig& config) {
  const fs::path root = config.dataset.empty() ? config.outDir / "data" : config.dataset;
  if (config.dataset.empty() && !fs::exists(root / kManifestFile))
    write_synth(synth_generate(config.synth, synth_seed(config)), root);
  DatasetLoad load = load_dataset(root);
  if (load.manifest.ids.empty()) {
    std::string why;
    for (const LoadError& e : load.errors) why += "\n  " + e.id + ": " + e.message;
    throw InputError("dataset " + root.string() + " has no usable sequences" + why);
  }
  const fs::path split = config.outDir / "split.json";
  if (fs::exists(split)) {
    DatasetManifest m = load_manifest(split);
    if (m.ids != load.manifest.ids || m.foldCount != config.folds)
      throw OrchestrationError(split.string() + " does not match the dataset or fold count; use a fresh outDir");
    m.root = root;
    m.frameCounts = load.manifest.frameCounts;
    return m;
  }
  DatasetManifest m = kfold_split(load.manifest, config.folds, split_seed(config));
  save_manifest(m, split);
  return m;
}

Model obtain_model(const CampaignConfig& config, const ResultsStore& store, const DatasetManifest& manifest,
                   const ModelSpec& spec, int fold, RunRole role, const Progress& progress) {
  const std::string name = checkpoint_name(spec.label(), fold, role);
  const ModelSpec want = role_spec(spec, role);
  const fs::path path = store.checkpoint_path(name);
  if (fs::exists(path)) {
    Checkpoint ck = load_checkpoint(path);
    if (!(ck.model.spec() == want))
      throw OrchestrationError("checkpoint " + path.string() + " holds a different model spec than run '" +
                               run_id(spec.label(), fold, role) + "' needs");
    return ck.model;
  }
  if (!config.trainMissing)
    throw OrchestrationError("missing checkpoint for run '" + run_id(spec.label(), fold, role) + "' (" +
                             path.string() + ")");
  TrainConfig tc = config.train;
  tc.seed = train_seed(config, name);
  const std::uint64_t iseed = init_seed(config, name);
  say(progress, "train " + name + " (" + std::to_string(tc.epochs) + " epochs)");
  const auto start = Clock::now();
  TrainResult tr = train_model(want, load_sequences(manifest, manifest.train_ids(fold)), tc, iseed);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  save_checkpoint(path, tr.model, iseed,
                  {{"checkpoint", name},
                   {"fold", fold},
                   {"train", tc},
                   {"finalLoss", tr.epochLoss.empty() ? 0.0 : tr.epochLoss.back()},
                   {"trainSeconds", secs}});
  say(progress, "trained " + name + fmt(" in %.1f s", secs));
  return tr.model;
}

RunRecord train_and_record(const CampaignConfig& config, const ResultsStore& store,
                           const DatasetManifest& manifest, const ModelSpec& spec, int fold,
                           const Progress& progress) {
  const std::string rid = run_id(spec.label(), fold, RunRole::Learned);
  const std::string ck = checkpoint_name(spec.label(), fold, RunRole::Learned);
  const Model m = obtain_model(config, store, manifest, spec, fold, RunRole::Learned, progress);
  const auto seqs = load_sequences(manifest, manifest.fold_ids(fold));
  const auto start = Clock::now();
  RunRecord r;
  r.runId = rid;
  r.spec = spec;
  r.weightSource = WeightSource::learned();
  r.fold = fold;
  r.seeds = {{"split", split_seed(config)}, {"init", init_seed(config, ck)}, {"train", train_seed(config, ck)}};
  for (const FrameSequence& seq : seqs) {
    const Prediction p = predict(m, seq);
    r.itemIds.push_back(seq.id);
    r.perItemErrors.push_back(angular_error(p.illuminant, seq.illuminant));
    const auto refs = save_masks(store, rid, seq.id, {p.capturedSpatialMasks, p.capturedTemporalWeights});
    r.maskRefs.insert(r.maskRefs.end(), refs.begin(), refs.end());
  }
  r.summary = summarize_errors(r.perItemErrors);
  r.wallTimeSeconds = std::chrono::duration<double>(Clock::now() - start).count();
  store.put(r);
  return r;
}

void write_report(const Report& report, const fs::path& stem) {
  write_file_atomic(fs::path(stem.string() + ".json"), report.json.dump(2) + "\n");
  write_file_atomic(fs::path(stem.string() + ".txt"), report.text);
}

Wp1Result wp1_report(const CampaignConfig& config, const ResultsStore& store) {
  const std::vector<ModelSpec> specs = config.model_specs();
  const std::vector<int> folds = config.fold_list();
  const VerdictOptions opts{config.alpha, config.tTest};
  Wp1Result out;

  std::vector<std::vector<double>> learned, uniform;
  std::vector<double> raw;
  for (const ModelSpec& s : specs) {
    learned.push_back(fold_maes(store, s.label(), folds, RunRole::Learned));
    uniform.push_back(fold_maes(store, s.label(), folds, RunRole::Uniform));
    raw.push_back(compare_samples(learned.back(), uniform.back(), config.tTest).pValue);
  }
  const std::vector<double> adj = stats::benjamini_hochberg(raw);
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.verdicts.push_back(wp1_verdict(ConfigKey::of(specs[i]), learned[i], uniform[i], opts, adj[i]));

  std::optional<std::vector<double>> baseline;
  if (config.includeBaseline) {
    baseline = fold_maes(store, "B", folds, RunRole::Learned);
    std::vector<double> braw;
    for (std::size_t i = 0; i < specs.size(); ++i)
      braw.push_back(compare_samples(learned[i], *baseline, config.tTest).pValue);
    const std::vector<double> badj = stats::benjamini_hochberg(braw);
    for (std::size_t i = 0; i < specs.size(); ++i)
      out.accuracy.push_back(accuracy_vs_baseline(ConfigKey::of(specs[i]), learned[i], *baseline, opts, badj[i]));
  }

  // ANOVA over saliency type, dimensions and weight source.
  const std::vector<std::string> all_factors{"type", "dims", "weights"};
  std::vector<std::set<std::string>> levels(3);
  std::vector<stats::Observation> obs;
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t f = 0; f < folds.size(); ++f)
      for (int w = 0; w < 2; ++w) {
        stats::Observation o;
        o.levels = {std::string(to_string(specs[i].type)), std::string(to_string(specs[i].dims)),
                    w == 0 ? "learned" : "uniform"};
        o.response = w == 0 ? learned[i][f] : uniform[i][f];
        for (int k = 0; k < 3; ++k) levels[k].insert(o.levels[k]);
        obs.push_back(o);
      }
  std::vector<int> keep;
  for (int k = 0; k < 3; ++k)
    if (levels[k].size() > 1) keep.push_back(k);
  std::size_t cells = 1;
  for (int k : keep) cells *= levels[k].size();
  const std::size_t configs = specs.size() * 2;
  if (cells != configs) {
    out.anovaNote = "skipped: the configurations do not form a full factorial design";
  } else {
    std::vector<stats::Observation> reduced;
    for (const auto& o : obs) {
      stats::Observation r{{}, o.response};
      for (int k : keep) r.levels.push_back(o.levels[k]);
      reduced.push_back(r);
    }
    for (int k : keep) out.anovaFactors.push_back(all_factors[k]);
    try {
      out.anova = stats::anova(out.anovaFactors, reduced, config.anovaInteractions);
    } catch (const Error& e) {
      out.anovaNote = std::string("skipped: ") + e.what();
      out.anovaFactors.clear();
    }
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> groups;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    names.push_back(specs[i].label() + "/learned");
    groups.push_back(learned[i]);
    names.push_back(specs[i].label() + "/uniform");
    groups.push_back(uniform[i]);
  }
  if (baseline) {
    names.push_back("B/learned");
    groups.push_back(*baseline);
  }
  for (const stats::PairwiseResult& p : stats::tukey_hsd(groups))
    out.tukey.push_back({names[static_cast<std::size_t>(p.groupA)], names[static_cast<std::size_t>(p.groupB)], p});

  Report summary = summary_report(out.verdicts, out.accuracy);
  nlohmann::ordered_json j;
  j["test"] = "WP1";
  j["folds"] = folds;
  j["alpha"] = config.alpha;
  j["tTest"] = to_string(config.tTest);
  j["summary"] = summary.json;
  j["verdicts"] = verdicts_json(out.verdicts);
  nlohmann::json acc = nlohmann::json::array();
  for (const auto& a : out.accuracy) acc.push_back(a);
  j["accuracy"] = ordered(acc);
  j["anovaFactors"] = out.anovaFactors;
  j["anova"] = out.anova ? ordered(nlohmann::json(*out.anova)) : nlohmann::ordered_json(nullptr);
  j["anovaNote"] = out.anovaNote;
  nlohmann::ordered_json tk = nlohmann::ordered_json::array();
  for (const TukeyRow& t : out.tukey)
    tk.push_back({{"groupA", t.groupA},
                  {"groupB", t.groupB},
                  {"meanDifference", t.result.meanDifference},
                  {"q", t.result.result.statistic},
                  {"pValue", t.result.result.pValue}});
  j["tukey"] = tk;

  std::ostringstream text;
  text << "WP1 (" << folds.size() << " folds, alpha " << config.alpha << ")\n" << summary.text << "\n";
  for (const VerdictRecord& v : out.verdicts) text << verdict_line(v);
  if (out.anova) {
    text << "\nANOVA (" << (config.anovaInteractions ? "with" : "without") << " two-way interactions)\n";
    char line[160];
    for (const stats::AnovaRow& r : out.anova->effects) {
      std::snprintf(line, sizeof line, "  %-16s SS=%-11.5g df=%-3g F=%-10.4g p=%.4g\n", r.source.c_str(),
                    r.sumSquares, r.df, r.F, r.pValue);
      text << line;
    }
    std::snprintf(line, sizeof line, "  %-16s SS=%-11.5g df=%g\n", "residual", out.anova->residual.sumSquares,
                  out.anova->residual.df);
    text << line;
  } else {
    text << "\nANOVA " << out.anovaNote << "\n";
  }
  text << "\nTukey HSD\n";
  for (const TukeyRow& t : out.tukey)
    text << "  " << t.groupA << " - " << t.groupB << ": diff=" << fmt("%.4f", t.result.meanDifference)
         << " p=" << fmt("%.4g", t.result.result.pValue) << "\n";
  out.report = {j, text.str()};
  return out;
}

Wp2Result wp2_report(const CampaignConfig& config, const ResultsStore& store) {
  const std::vector<ModelSpec> specs = config.model_specs();
  const std::vector<int> folds = config.fold_list();
  const VerdictOptions opts{config.alpha, config.tTest};
  Wp2Result out;
  out.thresholds.temporal = config.temporalThreshold;
  out.thresholds.spatial =
      config.calibrateSpatialThreshold ? calibrated_spatial_threshold(config, store) : config.spatialThreshold;

  std::vector<std::vector<double>> nc_nc, c_nc, u_c;
  std::vector<DivergenceReport> divs;
  std::vector<double> raw;
  for (const ModelSpec& s : specs) {
    const std::string l = s.label();
    nc_nc.push_back(fold_maes(store, l, folds, RunRole::NcOwn));
    c_nc.push_back(fold_maes(store, l, folds, RunRole::NcTransplanted));
    u_c.push_back(fold_maes(store, l, folds, RunRole::Uniform));
    std::vector<DivergenceReport> items;
    for (int f : folds) {
      const RunRecord own = store.get(run_id(l, f, RunRole::NcOwn));
      const RunRecord tr = store.get(run_id(l, f, RunRole::NcTransplanted));
      for (const std::string& item : own.itemIds) {
        const ItemMasks a = load_masks(store, own, item);
        const ItemMasks b = load_masks(store, tr, item);
        items.push_back(divergence_report(a.spatial, a.temporal, b.spatial, b.temporal, config.divergenceScale));
      }
    }
    divs.push_back(mean_report(items));
    raw.push_back(compare_samples(c_nc.back(), nc_nc.back(), config.tTest).pValue);
    raw.push_back(compare_samples(c_nc.back(), u_c.back(), config.tTest).pValue);
  }
  const std::vector<double> adj = stats::benjamini_hochberg(raw);
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.verdicts.push_back(wp2_verdict(ConfigKey::of(specs[i]), nc_nc[i], c_nc[i], u_c[i], divs[i],
                                       out.thresholds, opts, Wp2Adjusted{adj[2 * i], adj[2 * i + 1]}));

  Report summary = summary_report(out.verdicts);
  nlohmann::ordered_json j;
  j["test"] = "WP2";
  j["folds"] = folds;
  j["alpha"] = config.alpha;
  j["tTest"] = to_string(config.tTest);
  j["divergenceScale"] = to_string(config.divergenceScale);
  j["thresholds"] = {{"temporal", out.thresholds.temporal},
                     {"spatial", out.thresholds.spatial ? nlohmann::ordered_json(*out.thresholds.spatial)
                                                        : nlohmann::ordered_json(nullptr)},
                     {"spatialCalibrated", config.calibrateSpatialThreshold}};
  j["summary"] = summary.json;
  j["verdicts"] = verdicts_json(out.verdicts);

  std::ostringstream text;
  text << "WP2 (" << folds.size() << " folds, alpha " << config.alpha << ", divergence "
       << to_string(config.divergenceScale) << ", thresholds temporal " << fmt("%.4g", out.thresholds.temporal)
       << " spatial " << (out.thresholds.spatial ? fmt("%.4g", *out.thresholds.spatial) : std::string("-"))
       << ")\n"
       << summary.text << "\n";
  for (const VerdictRecord& v : out.verdicts) text << verdict_line(v);
  out.report = {j, text.str()};
  return out;
}

Wp1Result run_wp1(const CampaignConfig& config, const Progress& progress) {
  Runner run(config, progress);
  for (const ModelSpec& spec : config.model_specs())
    for (int f : config.fold_list()) {
      run.learned(spec, f);
      run.uniform(spec, f);
    }
  if (config.includeBaseline)
    for (int f : config.fold_list()) run.learned(baseline_spec(config), f);

  Wp1Result out = wp1_report(config, run.store());
  nlohmann::json v{{"verdicts", out.verdicts}, {"accuracy", out.accuracy}};
  write_file_atomic(run.store().verdict_path("wp1"), v.dump(2) + "\n");
  write_report(out.report, config.outDir / "wp1");
  return out;
}

Wp2Result run_wp2(const CampaignConfig& config, const Progress& progress) {
  if (needs_spatial_threshold(config) && !config.spatialThreshold && !config.calibrateSpatialThreshold)
    throw ConfigurationError("spatial configs need campaign.spatialThreshold or calibrateSpatialThreshold");
  Runner run(config, progress);
  for (const ModelSpec& spec : config.model_specs())
    for (int f : config.fold_list()) {
      run.learned(spec, f);
      run.uniform(spec, f);
      run.nc_own(spec, f);
      run.nc_transplanted(spec, f);
      if (config.calibrateSpatialThreshold && spec.has_spatial()) run.calibration(spec, f);
    }

  Wp2Result out = wp2_report(config, run.store());
  nlohmann::json v{{"verdicts", out.verdicts}};
  write_file_atomic(run.store().verdict_path("wp2"), v.dump(2) + "\n");
  write_report(out.report, config.outDir / "wp2");
  return out;
}

Report regenerate_report(const CampaignConfig& config) {
  const ResultsStore store(config.outDir);
  std::vector<VerdictRecord> verdicts;
  std::vector<AccuracyComparison> accuracy;
  bool any = false;
  if (fs::exists(store.verdict_path("wp1"))) {
    Wp1Result r = wp1_report(config, store);
    write_report(r.report, config.outDir / "wp1");
    verdicts.insert(verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    accuracy = r.accuracy;
    any = true;
  }
  if (fs::exists(store.verdict_path("wp2"))) {
    Wp2Result r = wp2_report(config, store);
    write_report(r.report, config.outDir / "wp2");
    verdicts.insert(verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    any = true;
  }
  if (!any) throw LookupError("no campaign verdicts under " + store.root().string() + "; run wp1 or wp2 first");
  Report report = summary_report(verdicts, accuracy);
  write_report(report, config.outDir / "report");
  return report;
}

}  // namespace faithful
