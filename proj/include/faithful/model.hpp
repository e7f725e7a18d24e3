#pragma once

#include "faithful/layers.hpp"
#include "faithful/model_spec.hpp"
#include "faithful/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace faithful {

/// Where the saliency used at inference comes from.
struct WeightSource {
  enum class Kind { Learned, UniformFrozen, TransplantedContextual };

  Kind kind = Kind::Learned;
  std::optional<std::uint64_t> seed;       // UniformFrozen only
  std::optional<std::string> donorRunId;   // TransplantedContextual only

  static WeightSource learned() { return {}; }
  static WeightSource uniform_frozen(std::uint64_t seed) { return {Kind::UniformFrozen, seed, {}}; }
  static WeightSource transplanted(std::string donor) {
    return {Kind::TransplantedContextual, {}, std::move(donor)};
  }

  void validate() const;
  friend bool operator==(const WeightSource&, const WeightSource&) = default;
};

std::string_view to_string(WeightSource::Kind k);
void to_json(nlohmann::json& j, const WeightSource& w);
void from_json(const nlohmann::json& j, WeightSource& w);

/// Saliency on `dims` replaced at inference by U(0, 1) draws keyed by
/// (seed, sequence id).
struct UniformFreeze {
  SaliencyDims dims = SaliencyDims::SpatioTemporal;
  std::uint64_t seed = 0;
  bool renormalizeAttention = true;
};

/// Donor saliency forced onto the host for one input sequence.
struct Transplant {
  std::vector<SpatialMask> spatial;         // empty: spatial saliency not transplanted
  std::optional<TemporalWeights> temporal;  // absent: temporal saliency not transplanted
};

using Intervention = std::variant<std::monostate, UniformFreeze, Transplant>;

/// Trainable network for one ModelSpec. Owns the parameters; forward passes
/// never mutate them.
class Network {
 public:
  Network(const ModelSpec& spec, std::uint64_t seed);

  struct Output {
    Var raw;  // unnormalized head output, (3)
    std::vector<SpatialMask> spatial;
    std::optional<TemporalWeights> temporal;
  };

  Output forward(const FrameSequence& seq, const Intervention& intervention) const;

  const ModelSpec& spec() const { return spec_; }
  const ParameterList& parameters() const { return params_; }
  std::size_t trainable_parameter_count() const { return params_.scalar_count(); }

  /// Grid (h', w') of the encoded frames for an input of the given size.
  std::pair<int, int> grid_size(int height, int width) const;

  const std::optional<SpatialAttention>& spatial_attention() const { return spatial_attention_; }
  const std::optional<TemporalAttention>& temporal_attention() const { return temporal_attention_; }

 private:
  ModelSpec spec_;
  std::optional<Encoder> encoder_;
  std::optional<NonContextualEncoder> nc_encoder_;
  std::optional<SpatialAttention> spatial_attention_;
  std::optional<TemporalAttention> temporal_attention_;
  std::optional<ConvLstmCell> lstm_;
  std::optional<PixelAffine> pointwise_;
  Linear head_;
  ParameterList params_;
};

/// Shares its Network with models derived through interventions; the
/// intervention only changes which saliency is used at inference.
class Model {
 public:
  Model(std::shared_ptr<Network> net, Intervention intervention, WeightSource source)
      : net_(std::move(net)), intervention_(std::move(intervention)), source_(std::move(source)) {}

  const ModelSpec& spec() const { return net_->spec(); }
  const Network& network() const { return *net_; }
  Network& network() { return *net_; }
  const std::shared_ptr<Network>& shared_network() const { return net_; }
  const Intervention& intervention() const { return intervention_; }
  const WeightSource& weight_source() const { return source_; }

 private:
  std::shared_ptr<Network> net_;
  Intervention intervention_;
  WeightSource source_;
};

/// Validates the spec and initializes weights deterministically from seed.
Model build_model(const ModelSpec& spec, std::uint64_t seed);

struct Prediction {
  Eigen::Vector3d illuminant;
  std::vector<SpatialMask> capturedSpatialMasks;
  std::optional<TemporalWeights> capturedTemporalWeights;
};

/// Inference: clamps the head output to nonnegative and L2-normalizes it.
Prediction predict(const Model& model, const FrameSequence& seq);

/// Training-mode forward returning the raw head output with its graph.
Network::Output forward(const Model& model, const FrameSequence& seq);

}  // namespace faithful
