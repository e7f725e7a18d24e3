#pragma once

#include "faithful/types.hpp"

#include <Eigen/Core>

#include <filesystem>

namespace faithful {

/// Viridis colour for v in [0, 1] (clamped), piecewise-linear over 17 stops.
Eigen::Vector3d viridis(double v);

/// Mask upsampled bilinearly to the frame size, coloured and blended with
/// the frame at the given opacity.
Image heatmap_overlay(const Image& frame, const SpatialMask& mask, double alpha = 0.5);

/// Writes heatmap_overlay(frame, mask) as PNG.
void render_heatmap(const Image& frame, const SpatialMask& mask, const std::filesystem::path& out);

}  // namespace faithful
