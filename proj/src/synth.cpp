#include "faithful/synth.hpp"

#include "faithful/error.hpp"
#include "faithful/metrics.hpp"
#include "faithful/rng.hpp"
#include "faithful/tensor_io.hpp"

#include <algorithm>
#include <cstdio>

namespace faithful {

namespace {

constexpr int kBlock = 4;
constexpr double kNoise = 0.005;
constexpr double kPatchReflectance = 0.8;
constexpr double kMinBiasDegrees = 15.0;

// Blocky random reflectance, rescaled per channel so its channel means agree.
std::vector<Eigen::ArrayXXd> balanced_reflectance(Rng& rng, int h, int w) {
  std::vector<Eigen::ArrayXXd> refl(3, Eigen::ArrayXXd(h, w));
  const int by = (h + kBlock - 1) / kBlock, bx = (w + kBlock - 1) / kBlock;
  for (int i = 0; i < by; ++i)
    for (int j = 0; j < bx; ++j) {
      const double r = rng.uniform(0.1, 0.9), g = rng.uniform(0.1, 0.9), b = rng.uniform(0.1, 0.9);
      for (int y = i * kBlock; y < std::min(h, (i + 1) * kBlock); ++y)
        for (int x = j * kBlock; x < std::min(w, (j + 1) * kBlock); ++x) {
          refl[0](y, x) = r;
          refl[1](y, x) = g;
          refl[2](y, x) = b;
        }
    }
  const double overall = (refl[0].mean() + refl[1].mean() + refl[2].mean()) / 3.0;
  for (auto& c : refl) c *= overall / c.mean();
  return refl;
}

Eigen::Vector3d draw_illuminant(Rng& rng) {
  Eigen::Vector3d c(rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0));
  return c.normalized();
}

// Channel bias that moves the gray-world estimate well away from the cast.
Eigen::Vector3d draw_bias(Rng& rng, const Eigen::Vector3d& cast) {
  for (;;) {
    Eigen::Vector3d b(rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0));
    if (angular_error(Eigen::Vector3d(b.cwiseProduct(cast)), cast) > kMinBiasDegrees) return b;
  }
}

struct FramePlan {
  const std::vector<Eigen::ArrayXXd>* reflectance;
  Eigen::Vector3d bias = Eigen::Vector3d::Ones();
};

Image render(const FramePlan& plan, const Eigen::Vector3d& light, int shift, double scale,
             const std::optional<PatchLocation>& patch, Rng& rng) {
  const auto& refl = *plan.reflectance;
  const int h = static_cast<int>(refl[0].rows()), w = static_cast<int>(refl[0].cols());
  Image img(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool in_patch = patch && y >= patch->y && y < patch->y + patch->size &&
                              x >= patch->x && x < patch->x + patch->size;
        const double r = in_patch ? kPatchReflectance
                                  : refl[c]((y + shift) % h, (x + 2 * shift) % w) * plan.bias[c];
        img.at(c, y, x) = std::clamp(scale * r * light[c] + kNoise * rng.normal(), 0.0, 1.0);
      }
  return img;
}

}  // namespace

std::string_view to_string(EvidenceMode m) {
  switch (m) {
    case EvidenceMode::Global: return "GLOBAL";
    case EvidenceMode::SpatialPatch: return "SPATIAL_PATCH";
    case EvidenceMode::KeyFrame: return "KEY_FRAME";
  }
  return "?";
}

EvidenceMode parse_evidence_mode(std::string_view s) {
  if (s == "GLOBAL") return EvidenceMode::Global;
  if (s == "SPATIAL_PATCH") return EvidenceMode::SpatialPatch;
  if (s == "KEY_FRAME") return EvidenceMode::KeyFrame;
  throw ConfigurationError("unknown evidence mode '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"numSequences", c.numSequences}, {"frames", c.frames},
                     {"height", c.height},             {"width", c.width},
                     {"evidenceMode", to_string(c.mode)}, {"patchSize", c.patchSize}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  const SynthConfig d;
  c.numSequences = j.value("numSequences", d.numSequences);
  c.frames = j.value("frames", d.frames);
  c.height = j.value("height", d.height);
  c.width = j.value("width", d.width);
  c.mode = parse_evidence_mode(j.value("evidenceMode", std::string(to_string(d.mode))));
  c.patchSize = j.value("patchSize", d.patchSize);
}

void to_json(nlohmann::json& j, const Evidence& e) {
  j = nlohmann::json{{"id", e.id},
                     {"mode", to_string(e.mode)},
                     {"illuminant", {e.illuminant[0], e.illuminant[1], e.illuminant[2]}}};
  if (e.patch) j["patch"] = {{"y", e.patch->y}, {"x", e.patch->x}, {"size", e.patch->size}};
  if (e.keyFrame) j["keyFrame"] = *e.keyFrame;
}

void from_json(const nlohmann::json& j, Evidence& e) {
  e.id = j.at("id").get<std::string>();
  e.mode = parse_evidence_mode(j.at("mode").get<std::string>());
  const auto v = j.at("illuminant").get<std::vector<double>>();
  e.illuminant = Eigen::Vector3d(v.at(0), v.at(1), v.at(2));
  e.patch.reset();
  if (j.contains("patch"))
    e.patch = PatchLocation{j["patch"].at("y").get<int>(), j["patch"].at("x").get<int>(),
                            j["patch"].at("size").get<int>()};
  e.keyFrame = j.contains("keyFrame") ? std::optional(j["keyFrame"].get<int>()) : std::nullopt;
}

SynthDataset synth_generate(const SynthConfig& config, std::uint64_t seed) {
  if (config.numSequences <= 0 || config.frames <= 0 || config.height <= 0 || config.width <= 0)
    throw InputError("synthetic dataset dimensions must be positive");
  if (config.mode == EvidenceMode::SpatialPatch &&
      (config.patchSize <= 0 || config.patchSize > std::min(config.height, config.width)))
    throw InputError("evidence patch of size " + std::to_string(config.patchSize) +
                     " does not fit a " + std::to_string(config.height) + "x" +
                     std::to_string(config.width) + " frame");

  SynthDataset out;
  for (int i = 0; i < config.numSequences; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "seq_%03d", i);

    Evidence ev;
    ev.id = id;
    ev.mode = config.mode;
    ev.illuminant = draw_illuminant(rng);
    const Eigen::Vector3d light = ev.illuminant / ev.illuminant.maxCoeff();

    const auto balanced = balanced_reflectance(rng, config.height, config.width);
    FramePlan clean{&balanced, Eigen::Vector3d::Ones()};
    FramePlan biased{&balanced, Eigen::Vector3d::Ones()};
    if (config.mode != EvidenceMode::Global) biased.bias = draw_bias(rng, ev.illuminant);
    if (config.mode == EvidenceMode::SpatialPatch) {
      ev.patch = PatchLocation{
          static_cast<int>(rng.below(static_cast<std::uint64_t>(config.height - config.patchSize + 1))),
          static_cast<int>(rng.below(static_cast<std::uint64_t>(config.width - config.patchSize + 1))),
          config.patchSize};
    }
    if (config.mode == EvidenceMode::KeyFrame)
      ev.keyFrame = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.frames)));

    // One scale for the whole sequence keeps every frame unclipped.
    double peak = kPatchReflectance;
    for (int c = 0; c < 3; ++c)
      peak = std::max(peak, balanced[c].maxCoeff() * std::max(1.0, biased.bias[c]));
    const double scale = 0.9 / peak;

    FrameSequence seq;
    seq.id = id;
    seq.illuminant = ev.illuminant;
    for (int t = 0; t < config.frames; ++t) {
      const bool key = config.mode == EvidenceMode::Global ||
                       (config.mode == EvidenceMode::KeyFrame && t == *ev.keyFrame);
      seq.frames.push_back(render(key ? clean : biased, light, t, scale, ev.patch, rng));
    }
    out.sequences.push_back(std::move(seq));
    out.evidence.push_back(std::move(ev));
  }
  return out;
}

DatasetManifest write_synth(const SynthDataset& data, const std::filesystem::path& root) {
  DatasetManifest manifest;
  manifest.root = root;
  for (const FrameSequence& seq : data.sequences) {
    save_sequence(root, seq);
    manifest.ids.push_back(seq.id);
    manifest.frameCounts[seq.id] = static_cast<int>(seq.frames.size());
  }
  std::sort(manifest.ids.begin(), manifest.ids.end());
  write_file_atomic(root / kEvidenceFile, nlohmann::json(data.evidence).dump(2) + "\n");
  save_manifest(manifest, root / kManifestFile);
  return manifest;
}

Eigen::Vector3d gray_world(const Image& frame, const Eigen::Matrix<bool, -1, -1>& include) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      if (include.size() && !include(y, x)) continue;
      for (int c = 0; c < 3; ++c) sum[c] += frame.at(c, y, x);
    }
  if (sum.norm() == 0.0) throw InputError("gray_world: no pixels selected");
  return sum.normalized();
}

}  // namespace faithful
