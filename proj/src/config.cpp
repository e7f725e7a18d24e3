#include "faithful/config.hpp"

#include "faithful/error.hpp"
#include "faithful/tensor_io.hpp"

#include <set>

namespace faithful {

std::string_view to_string(DivergenceScale s) {
  return s == DivergenceScale::Bounded ? "BOUNDED" : "PAPER_SCALE";
}

DivergenceScale parse_divergence_scale(std::string_view s) {
  if (s == "BOUNDED") return DivergenceScale::Bounded;
  if (s == "PAPER_SCALE") return DivergenceScale::PaperScale;
  throw ConfigurationError("unknown divergence scale '" + std::string(s) + "'");
}

std::string_view to_string(stats::TTestKind k) { return k == stats::TTestKind::Welch ? "WELCH" : "PAIRED"; }

stats::TTestKind parse_ttest_kind(std::string_view s) {
  if (s == "WELCH") return stats::TTestKind::Welch;
  if (s == "PAIRED") return stats::TTestKind::Paired;
  throw ConfigurationError("unknown t-test kind '" + std::string(s) + "'");
}

std::vector<ModelSpec> CampaignConfig::model_specs() const {
  std::vector<ModelSpec> out;
  for (const std::string& label : specs) {
    const ModelSpec parsed = spec_from_label(label);
    ModelSpec s = model;
    s.type = parsed.type;
    s.dims = parsed.dims;
    s.spatialContextual = true;
    s.temporalContextual = true;
    s.validate();
    out.push_back(s);
  }
  return out;
}

std::vector<int> CampaignConfig::fold_list() const {
  if (!runFolds.empty()) return runFolds;
  std::vector<int> all(static_cast<std::size_t>(folds));
  for (int i = 0; i < folds; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

void CampaignConfig::validate() const {
  if (specs.empty()) throw ConfigurationError("campaign lists no specs");
  std::set<std::string> seen;
  for (const std::string& s : specs)
    if (!seen.insert(s).second) throw ConfigurationError("spec '" + s + "' listed twice");
  for (const ModelSpec& s : model_specs())
    if (s.type == SaliencyType::None)
      throw ConfigurationError("campaign specs need saliency; the baseline is added by includeBaseline");
  if (folds < 2) throw ConfigurationError("folds must be at least 2");
  for (int f : runFolds)
    if (f < 0 || f >= folds) throw ConfigurationError("runFolds entry " + std::to_string(f) + " out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigurationError("alpha must lie in (0, 1)");
  if (!(temporalThreshold >= 0.0)) throw ConfigurationError("temporalThreshold must be nonnegative");
  if (spatialThreshold && !(*spatialThreshold >= 0.0))
    throw ConfigurationError("spatialThreshold must be nonnegative");
  train.validate();
}

void to_json(nlohmann::json& j, const CampaignConfig& c) {
  nlohmann::json model = c.model;
  model.erase("saliencyType");
  model.erase("saliencyDims");
  model.erase("spatialContextual");
  model.erase("temporalContextual");
  j = nlohmann::json{{"seed", c.seed},
                     {"outDir", c.outDir.string()},
                     {"dataset", c.dataset.string()},
                     {"synth", c.synth},
                     {"model", model},
                     {"train", c.train},
                     {"campaign",
                      {{"specs", c.specs},
                       {"folds", c.folds},
                       {"runFolds", c.runFolds},
                       {"alpha", c.alpha},
                       {"tTest", to_string(c.tTest)},
                       {"includeBaseline", c.includeBaseline},
                       {"trainMissing", c.trainMissing},
                       {"anovaInteractions", c.anovaInteractions},
                       {"divergenceScale", to_string(c.divergenceScale)},
                       {"temporalThreshold", c.temporalThreshold},
                       {"spatialThreshold", c.spatialThreshold ? nlohmann::json(*c.spatialThreshold)
                                                               : nlohmann::json(nullptr)},
                       {"calibrateSpatialThreshold", c.calibrateSpatialThreshold}}}};
}

namespace {

// Keys accepted in a section are exactly those its defaults serialize to.
void reject_unknown(const nlohmann::json& section, const nlohmann::json& defaults, const std::string& where) {
  if (!section.is_object()) throw ConfigurationError(where + " must be an object");
  for (const auto& [key, value] : section.items())
    if (!defaults.contains(key)) throw ConfigurationError("unknown config key '" + where + key + "'");
}

}  // namespace

void from_json(const nlohmann::json& j, CampaignConfig& c) {
  const CampaignConfig d;
  const nlohmann::json defaults = d;
  reject_unknown(j, defaults, "");
  for (const char* section : {"synth", "model", "train", "campaign"})
    if (j.contains(section)) reject_unknown(j[section], defaults[section], std::string(section) + ".");
  c.seed = j.value("seed", d.seed);
  c.outDir = j.value("outDir", d.outDir.string());
  c.dataset = j.value("dataset", std::string{});
  c.synth = j.value("synth", d.synth);
  if (j.contains("model")) {
    nlohmann::json m = j["model"];
    m["saliencyType"] = "NONE";
    m["saliencyDims"] = "NONE";
    c.model = m.get<ModelSpec>();
  }
  c.train = j.contains("train") ? j["train"].get<TrainConfig>() : d.train;
  if (j.contains("campaign")) {
    const auto& k = j["campaign"];
    c.specs = k.value("specs", d.specs);
    c.folds = k.value("folds", d.folds);
    c.runFolds = k.value("runFolds", d.runFolds);
    c.alpha = k.value("alpha", d.alpha);
    c.tTest = parse_ttest_kind(k.value("tTest", std::string(to_string(d.tTest))));
    c.includeBaseline = k.value("includeBaseline", d.includeBaseline);
    c.trainMissing = k.value("trainMissing", d.trainMissing);
    c.anovaInteractions = k.value("anovaInteractions", d.anovaInteractions);
    c.divergenceScale =
        parse_divergence_scale(k.value("divergenceScale", std::string(to_string(d.divergenceScale))));
    c.temporalThreshold = k.value("temporalThreshold", d.temporalThreshold);
    if (k.contains("spatialThreshold") && !k["spatialThreshold"].is_null())
      c.spatialThreshold = k["spatialThreshold"].get<double>();
    c.calibrateSpatialThreshold = k.value("calibrateSpatialThreshold", d.calibrateSpatialThreshold);
  }
  c.validate();
}

CampaignConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const PersistenceError& e) {
    throw ConfigurationError(e.what());
  }
  try {
    return j.get<CampaignConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace faithful
