#include "faithful/model.hpp"

#include "faithful/error.hpp"
#include "faithful/interventions.hpp"

namespace faithful {

namespace {

void check_finite(const Var& v, const char* layer) {
  if (!v.value().allFinite()) throw NumericError(layer, "non-finite activation");
}

}  // namespace

std::string_view to_string(WeightSource::Kind k) {
  switch (k) {
    case WeightSource::Kind::Learned: return "LEARNED";
    case WeightSource::Kind::UniformFrozen: return "UNIFORM_FROZEN";
    case WeightSource::Kind::TransplantedContextual: return "TRANSPLANTED_CONTEXTUAL";
  }
  return "?";
}

void WeightSource::validate() const {
  if (seed.has_value() != (kind == Kind::UniformFrozen))
    throw ConfigurationError("weight source: seed must be present iff kind is UNIFORM_FROZEN");
  if (donorRunId.has_value() != (kind == Kind::TransplantedContextual))
    throw ConfigurationError(
        "weight source: donorRunId must be present iff kind is TRANSPLANTED_CONTEXTUAL");
}

void to_json(nlohmann::json& j, const WeightSource& w) {
  j = nlohmann::json{{"kind", to_string(w.kind)}};
  if (w.seed) j["seed"] = *w.seed;
  if (w.donorRunId) j["donorRunId"] = *w.donorRunId;
}

void from_json(const nlohmann::json& j, WeightSource& w) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "LEARNED")
    w.kind = WeightSource::Kind::Learned;
  else if (kind == "UNIFORM_FROZEN")
    w.kind = WeightSource::Kind::UniformFrozen;
  else if (kind == "TRANSPLANTED_CONTEXTUAL")
    w.kind = WeightSource::Kind::TransplantedContextual;
  else
    throw ConfigurationError("unknown weight source kind '" + kind + "'");
  w.seed = j.contains("seed") ? std::optional(j["seed"].get<std::uint64_t>()) : std::nullopt;
  w.donorRunId =
      j.contains("donorRunId") ? std::optional(j["donorRunId"].get<std::string>()) : std::nullopt;
  w.validate();
}

Network::Network(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const bool confidence = spec_.uses_confidence();
  const int features = spec_.featureChannels;
  const int hidden = spec_.hiddenSize;

  if (spec_.spatialContextual)
    encoder_ = Encoder::make(spec_.backbone, features, confidence, rng);
  else
    nc_encoder_ = NonContextualEncoder::make(spec_, confidence, rng);
  if (spec_.spatial_is_attention()) spatial_attention_ = SpatialAttention::make(features, rng);
  if (spec_.temporal_is_attention())
    temporal_attention_ = TemporalAttention::make(hidden, hidden, spec_.attentionHidden, rng);
  if (spec_.temporalContextual)
    lstm_ = ConvLstmCell::make(features, hidden, spec_.kernelSize, rng);
  else
    pointwise_ = PixelAffine::make(features, hidden, rng);
  head_ = Linear::make(hidden, 3, rng);
  // Start from a neutral (grey) illuminant estimate.
  head_.bias.mutable_value().setConstant(0.5);

  if (encoder_) encoder_->collect("encoder", params_);
  if (nc_encoder_) nc_encoder_->collect("nc_encoder", params_);
  if (spatial_attention_) spatial_attention_->collect("spatial_attention", params_);
  if (temporal_attention_) temporal_attention_->collect("temporal_attention", params_);
  if (lstm_) lstm_->collect("conv_lstm", params_);
  if (pointwise_) pointwise_->collect("pointwise_temporal", params_);
  head_.collect("head", params_);
}

std::pair<int, int> Network::grid_size(int height, int width) const {
  return Encoder::output_size(height, width);
}

Network::Output Network::forward(const FrameSequence& seq, const Intervention& intervention) const {
  const int frames = static_cast<int>(seq.frames.size());
  if (frames == 0) throw InputError("sequence '" + seq.id + "' has no frames");
  const int height = seq.frames[0].height, width = seq.frames[0].width;
  for (const Image& f : seq.frames)
    if (f.channels != 3 || f.height != height || f.width != width ||
        f.data.size() != 3 * height * width)
      throw ShapeError("sequence '" + seq.id + "' has inconsistent or non-RGB frames");
  const auto [gh, gw] = grid_size(height, width);

  const auto* freeze = std::get_if<UniformFreeze>(&intervention);
  const auto* donor = std::get_if<Transplant>(&intervention);
  const bool freeze_spatial = freeze && (freeze->dims == SaliencyDims::Spatial ||
                                         freeze->dims == SaliencyDims::SpatioTemporal);
  const bool freeze_temporal = freeze && (freeze->dims == SaliencyDims::Temporal ||
                                          freeze->dims == SaliencyDims::SpatioTemporal);

  std::vector<Var> features;
  std::vector<Var> confidence_masks;
  for (const Image& f : seq.frames) {
    Var img = ad::constant(f.data, {3, height, width});
    EncoderOutput e = encoder_ ? (*encoder_)(img) : (*nc_encoder_)(img);
    check_finite(e.features, "encoder");
    features.push_back(e.features);
    if (e.confidence) confidence_masks.push_back(confidence_from_encoding(e).mask);
  }

  Output out;

  // Spatial saliency.
  std::optional<std::vector<SpatialMask>> spatial_override;
  if (freeze_spatial) spatial_override = frozen_spatial_draws(freeze->seed, seq.id, frames, gh, gw);
  if (donor && !donor->spatial.empty()) {
    if (static_cast<int>(donor->spatial.size()) != frames)
      throw InputError("transplanted spatial masks cover " + std::to_string(donor->spatial.size()) +
                       " frames, sequence has " + std::to_string(frames));
    spatial_override.emplace();
    for (const SpatialMask& m : donor->spatial) spatial_override->push_back(resize_bilinear(m, gh, gw));
  }

  std::vector<Var> masked = features;
  if (spec_.has_spatial()) {
    for (int t = 0; t < frames; ++t) {
      Var m;
      if (spatial_override)
        m = mask_var((*spatial_override)[t]);
      else if (spatial_attention_)
        m = spatial_attention_forward(*spatial_attention_, features[t]);
      else
        m = confidence_masks[t];
      check_finite(m, "spatial_saliency");
      masked[t] = apply_spatial_mask(features[t], m);
      out.spatial.push_back(to_mask(m));
    }
  }

  // Temporal stage.
  std::vector<Var> ys;
  HiddenState state = zero_state(spec_.hiddenSize, gh, gw);
  for (int t = 0; t < frames; ++t) {
    if (lstm_) {
      state = conv_lstm_step(*lstm_, masked[t], state);
      ys.push_back(state.h);
    } else {
      ys.push_back(pointwise_->pointwise(masked[t]));
    }
    check_finite(ys.back(), lstm_ ? "conv_lstm" : "pointwise_temporal");
  }

  Var representation;
  if (spec_.has_temporal()) {
    const bool attention = spec_.temporal_is_attention();
    Var weights;
    bool normalized = attention;
    if (freeze_temporal) {
      TemporalWeights w =
          frozen_temporal_draws(freeze->seed, seq.id, frames, attention && freeze->renormalizeAttention);
      weights = ad::constant(w.weights.array(), {frames});
      normalized = w.normalized;
    } else if (donor && donor->temporal) {
      if (donor->temporal->weights.size() != frames)
        throw InputError("transplanted temporal weights cover " +
                         std::to_string(donor->temporal->weights.size()) + " frames, sequence has " +
                         std::to_string(frames));
      weights = ad::constant(donor->temporal->weights.array(), {frames});
      normalized = donor->temporal->normalized;
    } else if (temporal_attention_) {
      // Contextual models query with the final ConvLSTM state; without
      // recurrence there is no state to query with.
      const HiddenState query = lstm_ ? state : zero_state(spec_.hiddenSize, gh, gw);
      weights = temporal_attention_forward(*temporal_attention_, ys, query).weights;
    } else {
      weights = temporal_confidence_weights(confidence_masks);
    }
    check_finite(weights, "temporal_saliency");
    const Var combination = attention ? weights : ad::normalize_sum(weights);
    representation = ad::weighted_sum(ys, combination);
    out.temporal = TemporalWeights{weights.value().matrix(), normalized};
  } else if (lstm_) {
    representation = state.h;
  } else {
    representation = ad::weighted_sum(ys, ad::constant(ad::Array::Constant(frames, 1.0 / frames), {frames}));
  }

  out.raw = head_(ad::global_avg_pool(representation));
  check_finite(out.raw, "head");
  return out;
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  return Model(std::make_shared<Network>(spec, seed), std::monostate{}, WeightSource::learned());
}

Network::Output forward(const Model& model, const FrameSequence& seq) {
  return model.network().forward(seq, model.intervention());
}

Prediction predict(const Model& model, const FrameSequence& seq) {
  ad::NoGradGuard no_grad;
  Network::Output out = forward(model, seq);
  const Eigen::Vector3d clamped = out.raw.value().matrix().cwiseMax(0.0);
  const double norm = clamped.norm();
  if (!(norm > 0.0)) throw NumericError("head", "illuminant estimate is zero after clamping");
  return {clamped / norm, std::move(out.spatial), std::move(out.temporal)};
}

}  // namespace faithful
