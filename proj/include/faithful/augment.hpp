#pragma once

#include "faithful/rng.hpp"
#include "faithful/types.hpp"

namespace faithful {

/// One geometric draw, applied identically to every frame of a sequence.
struct AugmentParams {
  double angleDegrees = 0.0;  // [-30, 30]
  double crop = 1.0;          // proportion kept, [0.8, 1.0]
  bool flip = false;          // horizontal

  bool is_identity() const { return angleDegrees == 0.0 && crop == 1.0 && !flip; }
};

AugmentParams draw_augment(Rng& rng);

/// Rotates about the centre, takes a centred crop of the given proportion,
/// resizes back to the input size and optionally mirrors. Bilinear sampling
/// with reflected edges.
Image augment_frame(const Image& frame, const AugmentParams& params);

FrameSequence apply_augment(const FrameSequence& seq, const AugmentParams& params);

/// Draws once from rng and applies the draw to all frames.
FrameSequence augment(const FrameSequence& seq, Rng& rng);

}  // namespace faithful
