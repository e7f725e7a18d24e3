#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace faithful {

/// Per-frame saliency map over the encoded grid, values in [0, 1].
using SpatialMask = Eigen::MatrixXd;

/// Per-timestep saliency. Attention weights are normalized (sum to 1);
/// confidence-derived weights are per-frame mask means in [0, 1].
struct TemporalWeights {
  Eigen::VectorXd weights;
  bool normalized = false;

  friend bool operator==(const TemporalWeights&, const TemporalWeights&) = default;
};

/// Planar (channel, row, column) image with values in [0, 1].
struct Image {
  int channels = 3;
  int height = 0;
  int width = 0;
  Eigen::ArrayXd data;

  Image() = default;
  Image(int c, int h, int w) : channels(c), height(h), width(w), data(Eigen::ArrayXd::Zero(c * h * w)) {}

  double& at(int c, int y, int x) { return data[(c * height + y) * width + x]; }
  double at(int c, int y, int x) const { return data[(c * height + y) * width + x]; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.channels == b.channels && a.height == b.height && a.width == b.width &&
           (a.data == b.data).all();
  }
};

/// Ordered video frames; the illuminant belongs to the last (shot) frame.
struct FrameSequence {
  std::string id;
  std::vector<Image> frames;
  Eigen::Vector3d illuminant = Eigen::Vector3d::Ones().normalized();
};

/// Validates (nonnegative, nonzero) and unit-normalizes an illuminant.
Eigen::Vector3d make_illuminant(const Eigen::Vector3d& rgb);

/// Throws InputError unless every element is finite and in [0, 1].
void validate_mask(const SpatialMask& mask);

/// Bilinear resize with half-pixel centres; identity when shapes agree.
Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& src, int rows, int cols);

}  // namespace faithful
