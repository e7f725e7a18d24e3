#pragma once

// Weight manipulations for the two faithfulness tests: frozen uniform saliency
// (WP1) and transplanting contextual saliency into non-contextual hosts (WP2).

#include "faithful/model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace faithful {

/// Replaces saliency on `dims` with frozen U(0,1) draws. Attention temporal
/// weights are renormalized to sum 1 when `renormalize_attention` is set;
/// confidence temporal weights are always left raw.
Model freeze_uniform(const Model& model, SaliencyDims dims, std::uint64_t seed,
                     bool renormalize_attention = true);

struct CapturedSaliency {
  std::vector<SpatialMask> spatial;
  std::optional<TemporalWeights> temporal;
};

/// Masks exactly as used by a forward pass of `model` on `seq`.
CapturedSaliency capture_masks(const Model& model, const FrameSequence& seq);

/// Overrides the host's saliency with donor masks for one input. Spatial
/// masks are bilinearly resized when the grids differ.
Model transplant(const Model& host, CapturedSaliency donor, std::string donor_run_id = "donor");

// Frozen draws, shared with the forward pass.
std::vector<SpatialMask> frozen_spatial_draws(std::uint64_t seed, const std::string& item, int frames,
                                              int height, int width);
TemporalWeights frozen_temporal_draws(std::uint64_t seed, const std::string& item, int frames,
                                      bool normalize);

}  // namespace faithful
