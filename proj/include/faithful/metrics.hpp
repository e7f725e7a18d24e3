#pragma once

#include "faithful/error.hpp"
#include "faithful/types.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace faithful {

/// Angle in degrees between an estimated and a reference illuminant.
/// Evaluated as atan2(|a x b|, a . b), which equals the arccos of the cosine
/// similarity but stays well conditioned near 0 and 180 degrees.
template <class DerivedA, class DerivedB>
double angular_error(const Eigen::MatrixBase<DerivedA>& estimate,
                     const Eigen::MatrixBase<DerivedB>& reference) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedA, 3);
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedB, 3);
  const Eigen::Vector3d a = estimate.template cast<double>();
  const Eigen::Vector3d b = reference.template cast<double>();
  if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0)
    throw InputError("angular_error: zero-length illuminant");
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / M_PI;
}

struct ErrorSummary {
  double mean = 0.0;
  double median = 0.0;
  double trimean = 0.0;
  double best25 = 0.0;
  double worst25 = 0.0;
  double worst5 = 0.0;
  std::size_t n = 0;

  friend bool operator==(const ErrorSummary&, const ErrorSummary&) = default;
};

void to_json(nlohmann::json& j, const ErrorSummary& s);
void from_json(const nlohmann::json& j, ErrorSummary& s);

/// Linear-interpolation quantile at h = (n - 1) p of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Six-statistic summary. best25 / worst25 / worst5 are means of the lowest
/// ceil(n/4), highest ceil(n/4) and highest ceil(n/20) errors.
ErrorSummary summarize_errors(std::span<const double> errors);

/// Jensen-Shannon divergence in nats of the sum-normalized inputs; a zero-sum
/// input is treated as uniform. Lies in [0, ln 2].
double jsd(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Mean per-pixel binary cross-entropy -[a ln b + (1 - a) ln(1 - b)], with b
/// clamped to [1e-7, 1 - 1e-7]. Asymmetric.
double bce(const SpatialMask& a, const SpatialMask& b);

/// bce(a, b) - bce(a, a): the per-pixel Bernoulli KL divergence, zero iff a == b.
double excess_bce(const SpatialMask& a, const SpatialMask& b);

/// Gaussian-window SSIM (sigma 1.5, window 11 truncated to the image,
/// L = 1, valid positions only), averaged over window positions.
double ssim(const SpatialMask& a, const SpatialMask& b);

/// sum(min(a, b)) / sum(max(a, b)); two all-zero masks count as identical (1).
double soft_iou(const SpatialMask& a, const SpatialMask& b);

enum class DivergenceScale {
  Bounded,    // mean over frames of per-frame divergence
  PaperScale  // sum over frames, with the cross-entropy term summed over pixels
};

/// Per-frame divergence terms excess_bce + (1 - ssim) + (1 - soft_iou).
std::vector<double> spatial_divergence_frames(std::span<const SpatialMask> a,
                                              std::span<const SpatialMask> b,
                                              DivergenceScale scale = DivergenceScale::Bounded);
double spatial_divergence(std::span<const SpatialMask> a, std::span<const SpatialMask> b,
                          DivergenceScale scale = DivergenceScale::Bounded);

double temporal_divergence(const TemporalWeights& a, const TemporalWeights& b);

struct DivergenceReport {
  double temporal = 0.0;
  double spatial = 0.0;
  double spatiotemporal = 0.0;
  std::vector<double> perFrameSpatial;

  friend bool operator==(const DivergenceReport&, const DivergenceReport&) = default;
};

void to_json(nlohmann::json& j, const DivergenceReport& d);
void from_json(const nlohmann::json& j, DivergenceReport& d);

/// Divergence between two saliency sets for one input; either side may lack
/// a dimension only if the other lacks it too.
DivergenceReport divergence_report(std::span<const SpatialMask> spatial_a,
                                   const std::optional<TemporalWeights>& temporal_a,
                                   std::span<const SpatialMask> spatial_b,
                                   const std::optional<TemporalWeights>& temporal_b,
                                   DivergenceScale scale = DivergenceScale::Bounded);

/// Mean of per-item reports; perFrameSpatial concatenates the items' frames.
DivergenceReport mean_report(std::span<const DivergenceReport> items);

}  // namespace faithful
