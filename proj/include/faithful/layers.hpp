#pragma once

// Building blocks of the saliency-augmented CNN + ConvLSTM: trainable layers,
// the spatial/temporal attention modules, confidence extraction, the
// ConvLSTM cell and the non-contextual replacements used by the WP2 ablation.

#include "faithful/autodiff.hpp"
#include "faithful/model_spec.hpp"
#include "faithful/rng.hpp"
#include "faithful/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace faithful {

using ad::Var;

/// Named, ordered view of a network's trainable tensors.
class ParameterList {
 public:
  void add(std::string name, Var v) { entries_.emplace_back(std::move(name), std::move(v)); }
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  std::size_t scalar_count() const;
  void zero_grad() const;

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

struct Conv2d {
  Var weight;  // (out, in, k, k)
  Var bias;    // (out)
  int stride = 1;
  int padding = 0;

  static Conv2d make(int in, int out, int kernel, int stride, int padding, Rng& rng);
  int in_channels() const { return weight.dim(1); }
  int out_channels() const { return weight.dim(0); }
  Var operator()(const Var& x) const { return ad::conv2d(x, weight, bias, stride, padding); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct BatchNorm {
  Var gamma;
  Var beta;

  static BatchNorm make(int channels);
  Var operator()(const Var& x) const { return ad::batch_norm(x, gamma, beta); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct Linear {
  Var weight;  // (out, in)
  Var bias;

  static Linear make(int in, int out, Rng& rng);
  Var operator()(const Var& x) const { return ad::linear(x, weight, bias); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// ConvLSTM hidden and cell state, both (hidden, h, w).
struct HiddenState {
  Var h;
  Var c;
};

HiddenState zero_state(int hidden, int height, int width);

/// Three 3x3 conv layers down to one channel: conv-BN-ReLU, conv-BN-ReLU, conv-Sigmoid.
struct SpatialAttention {
  Conv2d conv1;
  BatchNorm norm1;
  Conv2d conv2;
  BatchNorm norm2;
  Conv2d conv3;

  static SpatialAttention make(int channels, Rng& rng);
  int in_channels() const { return conv1.in_channels(); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Scores each timestep from its pooled features and the pooled query state:
/// score_t = f2(tanh(f1([pool(x_t), pool(h)]))), then softmax over t.
struct TemporalAttention {
  Linear f1;
  Linear f2;

  static TemporalAttention make(int feature_channels, int state_channels, int hidden, Rng& rng);
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Canonical convolutional LSTM: gates i, f, o, g from one conv over [x, h].
struct ConvLstmCell {
  Conv2d gates;
  int hidden = 0;

  static ConvLstmCell make(int input_channels, int hidden, int kernel, Rng& rng);
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct EncoderOutput {
  Var features;                 // (F, h, w)
  std::optional<Var> confidence;  // raw nonnegative confidence, (1, h, w)
};

/// Contextual convolutional trunk. Downsamples by 8 with three stride-2 stages.
/// With confidence enabled the last layer emits one extra channel.
class Encoder {
 public:
  static Encoder make(Backbone backbone, int feature_channels, bool confidence, Rng& rng);

  EncoderOutput operator()(const Var& frame) const;
  static std::pair<int, int> output_size(int height, int width);
  int feature_channels() const { return feature_channels_; }
  bool has_confidence() const { return confidence_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  struct Fire {
    Conv2d squeeze, expand1, expand3;
  };
  Backbone backbone_ = Backbone::Tiny;
  int feature_channels_ = 0;
  bool confidence_ = false;
  std::vector<Conv2d> convs_;
  std::vector<Fire> fires_;
};

/// Per-pixel affine map (a 1x1 convolution).
struct PixelAffine {
  Conv2d pointwise;

  static PixelAffine make(int in, int out, Rng& rng);
  static PixelAffine identity(int channels);
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Non-contextual replacement for the convolutional encoder: a fixed adaptive
/// average pool onto the encoder's output grid followed by either a per-pixel
/// affine map or (DENSE mode) one dense layer over the flattened grid.
class NonContextualEncoder {
 public:
  static NonContextualEncoder make(const ModelSpec& spec, bool confidence, Rng& rng);

  EncoderOutput operator()(const Var& frame) const;
  int feature_channels() const { return feature_channels_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  NonContextualSpatialMode mode_ = NonContextualSpatialMode::PerPixel;
  int feature_channels_ = 0;
  bool confidence_ = false;
  int grid_h_ = 0;
  int grid_w_ = 0;
  std::optional<PixelAffine> affine_;
  std::optional<Linear> dense_;
};

// --- operations --------------------------------------------------------------

/// Mask (1, h, w) in [0, 1] for an encoded frame (C, h, w).
Var spatial_attention_forward(const SpatialAttention& module, const Var& x);

struct ConfidenceOutput {
  Var features;  // (F, h, w)
  Var mask;      // (1, h, w), rescaled to [0, 1]
  Var raw;       // (1, h, w), nonnegative, unrescaled
};

/// Runs a confidence-enabled encoder on a raw frame. The mask is the extra
/// channel after softplus, divided by its per-frame maximum.
ConfidenceOutput confidence_forward(const Encoder& encoder, const Var& frame);
ConfidenceOutput confidence_from_encoding(const EncoderOutput& encoded);

/// out[c, i, j] = x[c, i, j] * m[i, j].
Var apply_spatial_mask(const Var& x, const Var& mask);

struct TemporalAttentionOutput {
  Var weights;   // (T), softmax-normalized
  Var combined;  // sum_t weights[t] * seq[t]
};

TemporalAttentionOutput temporal_attention_forward(const TemporalAttention& module,
                                                   std::span<const Var> seq,
                                                   const HiddenState& query);

/// weight_t = mean of masks[t]; returned unnormalized.
TemporalWeights temporal_confidence_weights(std::span<const SpatialMask> masks);
/// Graph version of temporal_confidence_weights over (1, h, w) mask Vars.
Var temporal_confidence_weights(std::span<const Var> masks);

/// One ConvLSTM update; the step's output is the new hidden state h.
HiddenState conv_lstm_step(const ConvLstmCell& cell, const Var& input, const HiddenState& state);

/// Pools `frame` to (grid_h, grid_w) and applies the per-pixel affine map.
Var noncontextual_spatial_forward(const PixelAffine& affine, const Var& frame, int grid_h,
                                  int grid_w);

/// Per-timestep affine map without recurrence, combined across time with
/// `weights` (length T; uniform when absent).
Var noncontextual_temporal_forward(const PixelAffine& affine, std::span<const Var> seq,
                                   const std::optional<Var>& weights = std::nullopt);

/// Converts a (1, h, w) or (h, w) Var to a SpatialMask matrix and back.
SpatialMask to_mask(const Var& v);
Var mask_var(const SpatialMask& m);

}  // namespace faithful
