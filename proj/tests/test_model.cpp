#include "support.hpp"

#include "faithful/error.hpp"
#include "faithful/interventions.hpp"
#include "faithful/layers.hpp"
#include "faithful/metrics.hpp"
#include "faithful/model.hpp"
#include "faithful/verdicts.hpp"

#include <doctest.h>

using namespace faithful;
using testing::max_grad_error;
using testing::probe;
using testing::random_const;

namespace {

template <typename Module>
std::vector<Var> params_of(const Module& m) {
  ParameterList list;
  m.collect("m", list);
  std::vector<Var> out;
  for (const auto& [name, v] : list.entries()) out.push_back(v);
  return out;
}

template <typename Module>
void zero_params(const Module& m) {
  for (Var v : params_of(m)) v.mutable_value().setZero();
}

FrameSequence random_sequence(std::uint64_t seed, int frames = 3, int h = 16, int w = 16) {
  Rng rng(seed);
  FrameSequence seq;
  seq.id = "seq_" + std::to_string(seed);
  for (int t = 0; t < frames; ++t) {
    Image img(3, h, w);
    for (auto& v : img.data) v = rng.uniform(0.05, 1.0);
    seq.frames.push_back(img);
  }
  seq.illuminant = Eigen::Vector3d(0.5, 0.6, 0.4).normalized();
  return seq;
}

const std::vector<std::string> kLabels{"A-S", "A-T", "A-ST", "C-S", "C-T", "C-ST", "CA-ST"};

}  // namespace

TEST_CASE("spatial attention module gradient") {
  Rng rng(11);
  const SpatialAttention module = SpatialAttention::make(4, rng);
  auto params = params_of(module);
  Var x = testing::random_param(rng, {4, 5, 6});
  params.push_back(x);
  CHECK(max_grad_error(params, [&] { return probe(spatial_attention_forward(module, x), 1); }) < 1e-4);
}

TEST_CASE("temporal attention module gradient") {
  Rng rng(12);
  const TemporalAttention module = TemporalAttention::make(3, 3, 5, rng);
  auto params = params_of(module);
  std::vector<Var> seq;
  for (int t = 0; t < 4; ++t) seq.push_back(testing::random_param(rng, {3, 2, 2}));
  HiddenState q{testing::random_param(rng, {3, 2, 2}), testing::random_param(rng, {3, 2, 2})};
  params.insert(params.end(), seq.begin(), seq.end());
  params.push_back(q.h);
  auto f = [&] {
    auto out = temporal_attention_forward(module, seq, q);
    return ad::add(probe(out.weights, 1), probe(out.combined, 2));
  };
  CHECK(max_grad_error(params, f) < 1e-4);
}

TEST_CASE("confidence encoder gradient") {
  Rng rng(13);
  const Encoder enc = Encoder::make(Backbone::Tiny, 4, true, rng);
  Var frame = testing::random_param(rng, {3, 16, 16}, 0.5);
  auto params = params_of(enc);
  params.push_back(frame);
  auto f = [&] {
    ConfidenceOutput c = confidence_forward(enc, frame);
    return ad::add(probe(c.mask, 1), probe(c.features, 2));
  };
  CHECK(max_grad_error(params, f, 1e-6, 24) < 1e-4);
}

TEST_CASE("temporal confidence weights gradient") {
  Rng rng(14);
  std::vector<Var> masks;
  for (int t = 0; t < 3; ++t) masks.push_back(testing::random_param(rng, {1, 3, 3}));
  CHECK(max_grad_error(masks, [&] { return probe(temporal_confidence_weights(masks), 1); }) < 1e-4);
}

TEST_CASE("ConvLSTM step gradient") {
  Rng rng(15);
  const ConvLstmCell cell = ConvLstmCell::make(3, 4, 3, rng);
  auto params = params_of(cell);
  Var x = testing::random_param(rng, {3, 4, 4});
  HiddenState s{testing::random_param(rng, {4, 4, 4}), testing::random_param(rng, {4, 4, 4})};
  params.push_back(x);
  params.push_back(s.h);
  params.push_back(s.c);
  auto f = [&] {
    HiddenState n = conv_lstm_step(cell, x, s);
    return ad::add(probe(n.h, 1), probe(n.c, 2));
  };
  CHECK(max_grad_error(params, f) < 1e-4);
}

TEST_CASE("non-contextual replacement gradients") {
  Rng rng(16);
  const PixelAffine affine = PixelAffine::make(3, 4, rng);
  Var frame = testing::random_param(rng, {3, 16, 16});
  auto params = params_of(affine);
  params.push_back(frame);
  CHECK(max_grad_error(params, [&] { return probe(noncontextual_spatial_forward(affine, frame, 2, 2), 1); }) < 1e-4);

  const PixelAffine temporal = PixelAffine::make(4, 4, rng);
  std::vector<Var> seq{testing::random_param(rng, {4, 2, 2}), testing::random_param(rng, {4, 2, 2})};
  Var w = testing::random_param(rng, {2});
  auto tparams = params_of(temporal);
  tparams.insert(tparams.end(), seq.begin(), seq.end());
  tparams.push_back(w);
  CHECK(max_grad_error(tparams, [&] { return probe(noncontextual_temporal_forward(temporal, seq, w), 2); }) < 1e-4);
}

TEST_CASE("end-to-end network gradients, sampled") {
  const FrameSequence seq = random_sequence(3);
  for (const std::string& label : kLabels) {
    CAPTURE(label);
    for (const ModelSpec& spec : {spec_from_label(label), non_contextual_variant(spec_from_label(label))}) {
      const Model m = build_model(spec, 5);
      std::vector<Var> params;
      for (const auto& [name, v] : m.network().parameters().entries()) params.push_back(v);
      auto f = [&] { return ad::angular_error_deg(forward(m, seq).raw, seq.illuminant); };
      CHECK(max_grad_error(params, f, 1e-4, 3, 1e-4) < 1e-4);
    }
  }
}

TEST_CASE("zero-parameter spatial attention gives sigmoid(0) masks") {
  Rng rng(21);
  const SpatialAttention module = SpatialAttention::make(4, rng);
  zero_params(module);
  const SpatialMask m = to_mask(spatial_attention_forward(module, random_const(rng, {4, 3, 5})));
  CHECK((m.array() == 0.5).all());
}

TEST_CASE("zero-parameter temporal attention is uniform") {
  Rng rng(22);
  const TemporalAttention module = TemporalAttention::make(3, 3, 4, rng);
  zero_params(module);
  std::vector<Var> seq;
  for (int t = 0; t < 5; ++t) seq.push_back(random_const(rng, {3, 2, 2}));
  HiddenState q{random_const(rng, {3, 2, 2}), random_const(rng, {3, 2, 2})};
  const auto out = temporal_attention_forward(module, seq, q);
  CHECK((out.weights.value() == 1.0 / 5.0).all());
}

TEST_CASE("zero-parameter ConvLSTM from zero state outputs zero") {
  Rng rng(23);
  const ConvLstmCell cell = ConvLstmCell::make(3, 4, 3, rng);
  zero_params(cell);
  const HiddenState out = conv_lstm_step(cell, random_const(rng, {3, 4, 4}), zero_state(4, 4, 4));
  CHECK((out.h.value() == 0.0).all());
  CHECK((out.c.value() == 0.0).all());
}

TEST_CASE("zero-parameter confidence encoder gives an all-ones mask") {
  Rng rng(24);
  const Encoder enc = Encoder::make(Backbone::Tiny, 4, true, rng);
  zero_params(enc);
  const ConfidenceOutput c = confidence_forward(enc, random_const(rng, {3, 16, 16}));
  CHECK((c.mask.value() == 1.0).all());
}

TEST_CASE("masks lie in [0, 1] and attention weights sum to one") {
  for (const std::string& label : kLabels) {
    CAPTURE(label);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const FrameSequence seq = random_sequence(100 + s, 4);
      for (const ModelSpec& spec : {spec_from_label(label), non_contextual_variant(spec_from_label(label))}) {
        const Prediction p = predict(build_model(spec, s), seq);
        CHECK(p.illuminant.norm() == doctest::Approx(1.0));
        CHECK(p.illuminant.minCoeff() >= 0.0);
        CHECK(p.capturedSpatialMasks.size() == (spec.has_spatial() ? 4u : 0u));
        for (const SpatialMask& m : p.capturedSpatialMasks) {
          CHECK(m.minCoeff() >= 0.0);
          CHECK(m.maxCoeff() <= 1.0);
        }
        CHECK(p.capturedTemporalWeights.has_value() == spec.has_temporal());
        if (p.capturedTemporalWeights && spec.temporal_is_attention())
          CHECK(std::fabs(p.capturedTemporalWeights->weights.sum() - 1.0) < 1e-6);
        if (p.capturedTemporalWeights && !spec.temporal_is_attention()) {
          CHECK(p.capturedTemporalWeights->weights.minCoeff() >= 0.0);
          CHECK(p.capturedTemporalWeights->weights.maxCoeff() <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("attention-ST has more trainable parameters than confidence-ST") {
  const auto a = build_model(spec_from_label("A-ST"), 0).network().trainable_parameter_count();
  const auto c = build_model(spec_from_label("C-ST"), 0).network().trainable_parameter_count();
  CHECK(a > c);
}

TEST_CASE("spec labels and invariants") {
  CHECK(spec_from_label("CA-ST").label() == "CA-ST");
  CHECK(spec_from_label("B").label() == "B");
  CHECK_THROWS_AS(spec_from_label("CA-S"), ConfigurationError);
  CHECK_THROWS_AS(spec_from_label("X-S"), ConfigurationError);
  CHECK_THROWS_AS(spec_from_label("AS"), ConfigurationError);
  ModelSpec bad = spec_from_label("A-S");
  bad.kernelSize = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigurationError);
  const ModelSpec nc = non_contextual_variant(spec_from_label("C-T"));
  CHECK(nc.spatialContextual);
  CHECK_FALSE(nc.temporalContextual);
}

TEST_CASE("same seed builds identical models and predictions") {
  const FrameSequence seq = random_sequence(7);
  const Prediction a = predict(build_model(spec_from_label("A-ST"), 9), seq);
  const Prediction b = predict(build_model(spec_from_label("A-ST"), 9), seq);
  CHECK(a.illuminant == b.illuminant);
  CHECK(a.capturedSpatialMasks == b.capturedSpatialMasks);
  CHECK(a.capturedTemporalWeights == b.capturedTemporalWeights);
}

TEST_CASE("frozen uniform saliency is deterministic, in range and keyed by sequence") {
  const Model m = build_model(spec_from_label("C-ST"), 1);
  const Model f1 = freeze_uniform(m, SaliencyDims::SpatioTemporal, 42);
  const Model f2 = freeze_uniform(m, SaliencyDims::SpatioTemporal, 42);
  const FrameSequence s1 = random_sequence(1), s2 = random_sequence(2);
  const Prediction a = predict(f1, s1), b = predict(f2, s1), c = predict(f1, s2);
  CHECK(a.capturedSpatialMasks == b.capturedSpatialMasks);
  CHECK(a.illuminant == b.illuminant);
  CHECK_FALSE(a.capturedSpatialMasks == c.capturedSpatialMasks);
  for (const SpatialMask& mask : a.capturedSpatialMasks) {
    CHECK(mask.minCoeff() >= 0.0);
    CHECK(mask.maxCoeff() < 1.0);
  }
  CHECK(f1.weight_source().kind == WeightSource::Kind::UniformFrozen);
  CHECK(f1.weight_source().seed == 42u);
  // Confidence temporal weights stay raw per-frame draws.
  CHECK_FALSE(a.capturedTemporalWeights->normalized);

  const Model at = freeze_uniform(build_model(spec_from_label("A-T"), 1), SaliencyDims::Temporal, 3);
  CHECK(std::fabs(predict(at, s1).capturedTemporalWeights->weights.sum() - 1.0) < 1e-12);
  CHECK_THROWS_AS(freeze_uniform(build_model(spec_from_label("A-T"), 1), SaliencyDims::Spatial, 3),
                  ConfigurationError);
}

TEST_CASE("freezing leaves the shared network untouched") {
  const Model m = build_model(spec_from_label("A-S"), 4);
  const FrameSequence seq = random_sequence(5);
  const Prediction before = predict(m, seq);
  (void)predict(freeze_uniform(m, SaliencyDims::Spatial, 1), seq);
  CHECK(predict(m, seq).illuminant == before.illuminant);
}

TEST_CASE("transplanted masks drive the non-contextual host") {
  const FrameSequence seq = random_sequence(8);
  for (const std::string& label : kLabels) {
    CAPTURE(label);
    const ModelSpec spec = spec_from_label(label);
    const Model donor = build_model(spec, 1);
    const Model host = build_model(non_contextual_variant(spec), 2);
    const CapturedSaliency captured = capture_masks(donor, seq);
    const Model t = transplant(host, captured, "donor-run");
    CHECK(t.weight_source().kind == WeightSource::Kind::TransplantedContextual);
    CHECK(t.weight_source().donorRunId == std::string("donor-run"));
    const Prediction p = predict(t, seq);
    CHECK(p.capturedSpatialMasks == captured.spatial);
    if (captured.temporal) CHECK(p.capturedTemporalWeights->weights == captured.temporal->weights);
  }
}

TEST_CASE("transplant rejects mismatched dimensions and contextual hosts") {
  const FrameSequence seq = random_sequence(9);
  const CapturedSaliency spatial = capture_masks(build_model(spec_from_label("A-S"), 1), seq);
  CHECK_THROWS_AS(transplant(build_model(non_contextual_variant(spec_from_label("A-T")), 1), spatial),
                  ConfigurationError);
  CHECK_THROWS_AS(transplant(build_model(spec_from_label("A-S"), 1), spatial), ConfigurationError);
  CHECK_THROWS_AS(capture_masks(build_model(spec_from_label("B"), 1), seq), ConfigurationError);
}

TEST_CASE("self-transplant reproduces the host and leads to INCONCLUSIVE") {
  const FrameSequence seq = random_sequence(10);
  const Model host = build_model(non_contextual_variant(spec_from_label("C-ST")), 3);
  const Prediction own = predict(host, seq);
  const Prediction self = predict(transplant(host, capture_masks(host, seq)), seq);
  CHECK(self.illuminant.isApprox(own.illuminant, 1e-12));
  const DivergenceReport d = divergence_report(own.capturedSpatialMasks, own.capturedTemporalWeights,
                                               self.capturedSpatialMasks, self.capturedTemporalWeights);
  CHECK(d.spatial == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.temporal == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> same{2.0, 2.5, 3.0, 2.2};
  const VerdictRecord v =
      wp2_verdict(ConfigKey::parse("C-ST"), same, same, same, d, DivergenceThresholds{0.7, 0.5});
  CHECK(v.outcome == Outcome::Inconclusive);
}
