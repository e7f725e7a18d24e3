#include "faithful/interventions.hpp"

#include "faithful/error.hpp"
#include "faithful/rng.hpp"

namespace faithful {

namespace {

constexpr std::uint64_t kSpatialSalt = 0x5350415449414cULL;   // "SPATIAL"
constexpr std::uint64_t kTemporalSalt = 0x54454d504f52ULL;    // "TEMPOR"

bool covers_spatial(SaliencyDims d) {
  return d == SaliencyDims::Spatial || d == SaliencyDims::SpatioTemporal;
}
bool covers_temporal(SaliencyDims d) {
  return d == SaliencyDims::Temporal || d == SaliencyDims::SpatioTemporal;
}

}  // namespace

std::vector<SpatialMask> frozen_spatial_draws(std::uint64_t seed, const std::string& item, int frames,
                                              int height, int width) {
  Rng rng(derive_seed(derive_seed(seed, hash_string(item)), kSpatialSalt));
  std::vector<SpatialMask> masks;
  masks.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    SpatialMask m(height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) m(y, x) = rng.uniform();
    masks.push_back(std::move(m));
  }
  return masks;
}

TemporalWeights frozen_temporal_draws(std::uint64_t seed, const std::string& item, int frames,
                                      bool normalize) {
  Rng rng(derive_seed(derive_seed(seed, hash_string(item)), kTemporalSalt));
  TemporalWeights w;
  w.weights.resize(frames);
  for (int t = 0; t < frames; ++t) w.weights[t] = rng.uniform();
  if (normalize) w.weights /= w.weights.sum();
  w.normalized = normalize;
  return w;
}

Model freeze_uniform(const Model& model, SaliencyDims dims, std::uint64_t seed,
                     bool renormalize_attention) {
  const ModelSpec& spec = model.spec();
  if (dims == SaliencyDims::None)
    throw ConfigurationError("freeze_uniform: no saliency dimension selected");
  if (covers_spatial(dims) && !spec.has_spatial())
    throw ConfigurationError("freeze_uniform: model " + spec.label() +
                             " has no spatial saliency module to freeze");
  if (covers_temporal(dims) && !spec.has_temporal())
    throw ConfigurationError("freeze_uniform: model " + spec.label() +
                             " has no temporal saliency module to freeze");
  return Model(model.shared_network(), UniformFreeze{dims, seed, renormalize_attention},
               WeightSource::uniform_frozen(seed));
}

CapturedSaliency capture_masks(const Model& model, const FrameSequence& seq) {
  if (model.spec().dims == SaliencyDims::None)
    throw ConfigurationError("capture_masks: model " + model.spec().label() + " has no saliency");
  Prediction p = predict(model, seq);
  return {std::move(p.capturedSpatialMasks), std::move(p.capturedTemporalWeights)};
}

Model transplant(const Model& host, CapturedSaliency donor, std::string donor_run_id) {
  const ModelSpec& spec = host.spec();
  if (donor.spatial.empty() && !donor.temporal)
    throw ConfigurationError("transplant: donor carries no saliency");
  if (!donor.spatial.empty()) {
    if (!spec.has_spatial())
      throw ConfigurationError("transplant: spatial donor masks for host " + spec.label() +
                               " without spatial saliency");
    if (spec.spatialContextual)
      throw ConfigurationError("transplant: host " + spec.label() + " is spatially contextual");
    for (const SpatialMask& m : donor.spatial) validate_mask(m);
  }
  if (donor.temporal) {
    if (!spec.has_temporal())
      throw ConfigurationError("transplant: temporal donor weights for host " + spec.label() +
                               " without temporal saliency");
    if (spec.temporalContextual)
      throw ConfigurationError("transplant: host " + spec.label() + " is temporally contextual");
    if ((donor.temporal->weights.array() < 0.0).any() || !donor.temporal->weights.allFinite())
      throw InputError("transplant: temporal weights must be finite and nonnegative");
  }
  return Model(host.shared_network(), Transplant{std::move(donor.spatial), std::move(donor.temporal)},
               WeightSource::transplanted(std::move(donor_run_id)));
}

}  // namespace faithful
