#include "faithful/layers.hpp"

#include "faithful/error.hpp"

#include <cmath>

namespace faithful {

namespace {

ad::Array uniform_array(int n, double bound, Rng& rng) {
  ad::Array a(n);
  for (int i = 0; i < n; ++i) a[i] = rng.uniform(-bound, bound);
  return a;
}

}  // namespace

std::size_t ParameterList::scalar_count() const {
  std::size_t n = 0;
  for (auto& [name, v] : entries_) n += static_cast<std::size_t>(v.size());
  return n;
}

void ParameterList::zero_grad() const {
  for (auto [name, v] : entries_) v.zero_grad();
}

Conv2d Conv2d::make(int in, int out, int kernel, int stride, int padding, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * kernel * kernel));
  Conv2d c;
  c.weight = ad::parameter(uniform_array(out * in * kernel * kernel, bound, rng),
                           {out, in, kernel, kernel});
  c.bias = ad::parameter(uniform_array(out, bound, rng), {out});
  c.stride = stride;
  c.padding = padding;
  return c;
}

void Conv2d::collect(const std::string& prefix, ParameterList& out) const {
  out.add(prefix + ".weight", weight);
  out.add(prefix + ".bias", bias);
}

BatchNorm BatchNorm::make(int channels) {
  return {ad::parameter(ad::Array::Ones(channels), {channels}),
          ad::parameter(ad::Array::Zero(channels), {channels})};
}

void BatchNorm::collect(const std::string& prefix, ParameterList& out) const {
  out.add(prefix + ".gamma", gamma);
  out.add(prefix + ".beta", beta);
}

Linear Linear::make(int in, int out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = ad::parameter(uniform_array(out * in, bound, rng), {out, in});
  l.bias = ad::parameter(uniform_array(out, bound, rng), {out});
  return l;
}

void Linear::collect(const std::string& prefix, ParameterList& out) const {
  out.add(prefix + ".weight", weight);
  out.add(prefix + ".bias", bias);
}

HiddenState zero_state(int hidden, int height, int width) {
  return {ad::zeros({hidden, height, width}), ad::zeros({hidden, height, width})};
}

SpatialAttention SpatialAttention::make(int channels, Rng& rng) {
  const int mid1 = std::max(1, channels / 2);
  const int mid2 = std::max(1, channels / 4);
  SpatialAttention m;
  m.conv1 = Conv2d::make(channels, mid1, 3, 1, 1, rng);
  m.norm1 = BatchNorm::make(mid1);
  m.conv2 = Conv2d::make(mid1, mid2, 3, 1, 1, rng);
  m.norm2 = BatchNorm::make(mid2);
  m.conv3 = Conv2d::make(mid2, 1, 3, 1, 1, rng);
  return m;
}

void SpatialAttention::collect(const std::string& prefix, ParameterList& out) const {
  conv1.collect(prefix + ".conv1", out);
  norm1.collect(prefix + ".norm1", out);
  conv2.collect(prefix + ".conv2", out);
  norm2.collect(prefix + ".norm2", out);
  conv3.collect(prefix + ".conv3", out);
}

TemporalAttention TemporalAttention::make(int feature_channels, int state_channels, int hidden,
                                          Rng& rng) {
  return {Linear::make(feature_channels + state_channels, hidden, rng),
          Linear::make(hidden, 1, rng)};
}

void TemporalAttention::collect(const std::string& prefix, ParameterList& out) const {
  f1.collect(prefix + ".f1", out);
  f2.collect(prefix + ".f2", out);
}

ConvLstmCell ConvLstmCell::make(int input_channels, int hidden, int kernel, Rng& rng) {
  return {Conv2d::make(input_channels + hidden, 4 * hidden, kernel, 1, kernel / 2, rng), hidden};
}

void ConvLstmCell::collect(const std::string& prefix, ParameterList& out) const {
  gates.collect(prefix + ".gates", out);
}

// --- encoders ----------------------------------------------------------------

Encoder Encoder::make(Backbone backbone, int feature_channels, bool confidence, Rng& rng) {
  Encoder e;
  e.backbone_ = backbone;
  e.feature_channels_ = feature_channels;
  e.confidence_ = confidence;
  const int out = feature_channels + (confidence ? 1 : 0);
  if (backbone == Backbone::Tiny) {
    e.convs_.push_back(Conv2d::make(3, 16, 3, 2, 1, rng));
    e.convs_.push_back(Conv2d::make(16, 16, 3, 2, 1, rng));
    e.convs_.push_back(Conv2d::make(16, out, 3, 2, 1, rng));
  } else {
    auto fire = [&](int in) {
      return Fire{Conv2d::make(in, 8, 1, 1, 0, rng), Conv2d::make(8, 16, 1, 1, 0, rng),
                  Conv2d::make(8, 16, 3, 1, 1, rng)};
    };
    e.convs_.push_back(Conv2d::make(3, 16, 3, 2, 1, rng));
    e.fires_.push_back(fire(16));
    e.convs_.push_back(Conv2d::make(32, 32, 3, 2, 1, rng));
    e.fires_.push_back(fire(32));
    e.convs_.push_back(Conv2d::make(32, out, 3, 2, 1, rng));
  }
  return e;
}

std::pair<int, int> Encoder::output_size(int height, int width) {
  for (int i = 0; i < 3; ++i) {
    height = (height - 1) / 2 + 1;
    width = (width - 1) / 2 + 1;
  }
  return {height, width};
}

EncoderOutput Encoder::operator()(const Var& frame) const {
  if (frame.rank() != 3 || frame.dim(0) != 3)
    throw ShapeError("encoder expects a (3, H, W) frame, got " + ad::to_string(frame.shape()));
  Var x = frame;
  for (std::size_t i = 0; i + 1 < convs_.size(); ++i) {
    x = ad::relu(convs_[i](x));
    if (i < fires_.size()) {
      const Fire& f = fires_[i];
      Var s = ad::relu(f.squeeze(x));
      x = ad::concat(ad::relu(f.expand1(s)), ad::relu(f.expand3(s)));
    }
  }
  Var last = convs_.back()(x);
  EncoderOutput out;
  out.features = ad::relu(ad::slice(last, 0, feature_channels_));
  if (confidence_) out.confidence = ad::softplus(ad::slice(last, feature_channels_, 1));
  return out;
}

void Encoder::collect(const std::string& prefix, ParameterList& out) const {
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    convs_[i].collect(prefix + ".conv" + std::to_string(i), out);
    if (i < fires_.size()) {
      const std::string p = prefix + ".fire" + std::to_string(i);
      fires_[i].squeeze.collect(p + ".squeeze", out);
      fires_[i].expand1.collect(p + ".expand1", out);
      fires_[i].expand3.collect(p + ".expand3", out);
    }
  }
}

PixelAffine PixelAffine::make(int in, int out, Rng& rng) {
  return {Conv2d::make(in, out, 1, 1, 0, rng)};
}

PixelAffine PixelAffine::identity(int channels) {
  ad::Array w = ad::Array::Zero(channels * channels);
  for (int i = 0; i < channels; ++i) w[i * channels + i] = 1.0;
  Conv2d c;
  c.weight = ad::parameter(w, {channels, channels, 1, 1});
  c.bias = ad::parameter(ad::Array::Zero(channels), {channels});
  return {c};
}

void PixelAffine::collect(const std::string& prefix, ParameterList& out) const {
  pointwise.collect(prefix + ".pointwise", out);
}

NonContextualEncoder NonContextualEncoder::make(const ModelSpec& spec, bool confidence, Rng& rng) {
  NonContextualEncoder e;
  e.mode_ = spec.ncSpatialMode;
  e.feature_channels_ = spec.featureChannels;
  e.confidence_ = confidence;
  std::tie(e.grid_h_, e.grid_w_) = Encoder::output_size(spec.inputHeight, spec.inputWidth);
  const int out = spec.featureChannels + (confidence ? 1 : 0);
  if (e.mode_ == NonContextualSpatialMode::PerPixel) {
    e.affine_ = PixelAffine::make(3, out, rng);
  } else {
    const int cells = e.grid_h_ * e.grid_w_;
    e.dense_ = Linear::make(3 * cells, out * cells, rng);
  }
  return e;
}

EncoderOutput NonContextualEncoder::operator()(const Var& frame) const {
  if (frame.rank() != 3 || frame.dim(0) != 3)
    throw ShapeError("encoder expects a (3, H, W) frame, got " + ad::to_string(frame.shape()));
  const auto [gh, gw] = Encoder::output_size(frame.dim(1), frame.dim(2));
  const int out_channels = feature_channels_ + (confidence_ ? 1 : 0);
  Var y;
  if (mode_ == NonContextualSpatialMode::PerPixel) {
    y = noncontextual_spatial_forward(*affine_, frame, gh, gw);
  } else {
    if (gh != grid_h_ || gw != grid_w_)
      throw ShapeError("dense non-contextual encoder was built for a different frame size");
    Var pooled = ad::adaptive_avg_pool(frame, gh, gw);
    y = ad::reshape((*dense_)(ad::reshape(pooled, {3 * gh * gw})), {out_channels, gh, gw});
  }
  EncoderOutput out;
  out.features = ad::slice(y, 0, feature_channels_);
  if (confidence_) out.confidence = ad::softplus(ad::slice(y, feature_channels_, 1));
  return out;
}

void NonContextualEncoder::collect(const std::string& prefix, ParameterList& out) const {
  if (affine_) affine_->collect(prefix + ".affine", out);
  if (dense_) dense_->collect(prefix + ".dense", out);
}

// --- operations ----------------------------------------------------------------

Var spatial_attention_forward(const SpatialAttention& m, const Var& x) {
  if (x.rank() != 3 || x.dim(0) != m.in_channels())
    throw ShapeError("spatial attention expects " + std::to_string(m.in_channels()) +
                     " channels, got " + ad::to_string(x.shape()));
  Var y = ad::relu(m.norm1(m.conv1(x)));
  y = ad::relu(m.norm2(m.conv2(y)));
  return ad::sigmoid(m.conv3(y));
}

ConfidenceOutput confidence_from_encoding(const EncoderOutput& encoded) {
  if (!encoded.confidence) throw ConfigurationError("encoder has no confidence channel");
  return {encoded.features, ad::normalize_max(*encoded.confidence), *encoded.confidence};
}

ConfidenceOutput confidence_forward(const Encoder& encoder, const Var& frame) {
  return confidence_from_encoding(encoder(frame));
}

Var apply_spatial_mask(const Var& x, const Var& mask) { return ad::mul_channels(x, mask); }

TemporalAttentionOutput temporal_attention_forward(const TemporalAttention& m,
                                                   std::span<const Var> seq,
                                                   const HiddenState& query) {
  if (seq.empty()) throw InputError("temporal attention over an empty sequence");
  const Var q = ad::global_avg_pool(query.h);
  const int expected = m.f1.weight.dim(1);
  std::vector<Var> scores;
  scores.reserve(seq.size());
  for (const Var& x : seq) {
    if (x.rank() != 3 || x.dim(0) + q.size() != expected)
      throw ShapeError("temporal attention input " + ad::to_string(x.shape()) +
                       " incompatible with module input width " + std::to_string(expected));
    Var pooled = ad::concat(ad::global_avg_pool(x), q);
    scores.push_back(m.f2(ad::tanh(m.f1(pooled))));
  }
  Var weights = ad::softmax(ad::stack_scalars(scores));
  return {weights, ad::weighted_sum(seq, weights)};
}

TemporalWeights temporal_confidence_weights(std::span<const SpatialMask> masks) {
  if (masks.empty()) throw InputError("temporal confidence weights need at least one mask");
  TemporalWeights out;
  out.weights.resize(static_cast<Eigen::Index>(masks.size()));
  for (std::size_t t = 0; t < masks.size(); ++t) out.weights[t] = masks[t].mean();
  out.normalized = false;
  return out;
}

Var temporal_confidence_weights(std::span<const Var> masks) {
  if (masks.empty()) throw InputError("temporal confidence weights need at least one mask");
  std::vector<Var> means;
  means.reserve(masks.size());
  for (const Var& m : masks) means.push_back(ad::mean(m));
  return ad::stack_scalars(means);
}

HiddenState conv_lstm_step(const ConvLstmCell& cell, const Var& input, const HiddenState& state) {
  const int hidden = cell.hidden;
  if (input.rank() != 3 || state.h.rank() != 3 || state.h.shape() != state.c.shape() ||
      state.h.dim(0) != hidden || input.dim(1) != state.h.dim(1) ||
      input.dim(2) != state.h.dim(2) || input.dim(0) + hidden != cell.gates.in_channels())
    throw ShapeError("conv_lstm_step: input " + ad::to_string(input.shape()) + " / state " +
                     ad::to_string(state.h.shape()) + " incompatible with cell");
  Var z = cell.gates(ad::concat(input, state.h));
  Var i = ad::sigmoid(ad::slice(z, 0, hidden));
  Var f = ad::sigmoid(ad::slice(z, hidden, hidden));
  Var o = ad::sigmoid(ad::slice(z, 2 * hidden, hidden));
  Var g = ad::tanh(ad::slice(z, 3 * hidden, hidden));
  Var c = ad::add(ad::mul(f, state.c), ad::mul(i, g));
  Var h = ad::mul(o, ad::tanh(c));
  return {h, c};
}

Var noncontextual_spatial_forward(const PixelAffine& affine, const Var& frame, int grid_h,
                                  int grid_w) {
  if (frame.rank() != 3 || frame.dim(0) != affine.pointwise.in_channels())
    throw ShapeError("pixel affine expects " + std::to_string(affine.pointwise.in_channels()) +
                     " channels, got " + ad::to_string(frame.shape()));
  Var pooled = (frame.dim(1) == grid_h && frame.dim(2) == grid_w)
                   ? frame
                   : ad::adaptive_avg_pool(frame, grid_h, grid_w);
  return affine.pointwise(pooled);
}

Var noncontextual_temporal_forward(const PixelAffine& affine, std::span<const Var> seq,
                                   const std::optional<Var>& weights) {
  if (seq.empty()) throw InputError("non-contextual temporal stage over an empty sequence");
  std::vector<Var> ys;
  ys.reserve(seq.size());
  for (const Var& x : seq) {
    if (x.rank() != 3 || x.dim(0) != affine.pointwise.in_channels())
      throw ShapeError("pointwise temporal layer input " + ad::to_string(x.shape()));
    ys.push_back(affine.pointwise(x));
  }
  const int n = static_cast<int>(seq.size());
  Var w = weights ? *weights : ad::constant(ad::Array::Constant(n, 1.0 / n), {n});
  return ad::weighted_sum(ys, w);
}

SpatialMask to_mask(const Var& v) {
  if (!((v.rank() == 3 && v.dim(0) == 1) || v.rank() == 2))
    throw ShapeError("not a mask: " + ad::to_string(v.shape()));
  const int h = v.dim(v.rank() - 2), w = v.dim(v.rank() - 1);
  return Eigen::Map<const ad::RowMatrix>(v.value().data(), h, w);
}

Var mask_var(const SpatialMask& m) {
  ad::RowMatrix r = m;
  return ad::constant(Eigen::Map<const ad::Array>(r.data(), r.size()),
                      {1, static_cast<int>(m.rows()), static_cast<int>(m.cols())});
}

}  // namespace faithful
