#include "faithful/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace faithful {

namespace {

constexpr double kClamp = 1e-7;

void require_same_shape(const SpatialMask& a, const SpatialMask& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(op) + ": mask shapes differ");
  if (a.size() == 0) throw InputError(std::string(op) + ": empty mask");
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Eigen::VectorXd gaussian_window(int size) {
  constexpr double sigma = 1.5;
  const double centre = (size - 1) / 2.0;
  Eigen::VectorXd g(size);
  for (int i = 0; i < size; ++i) g[i] = std::exp(-(i - centre) * (i - centre) / (2 * sigma * sigma));
  return g / g.sum();
}

double pixel_bce(double a, double b) {
  const double bh = std::clamp(b, kClamp, 1.0 - kClamp);
  return -(a * std::log(bh) + (1.0 - a) * std::log(1.0 - bh));
}

}  // namespace

void to_json(nlohmann::json& j, const ErrorSummary& s) {
  j = nlohmann::json{{"mean", s.mean},       {"median", s.median},   {"trimean", s.trimean},
                     {"best25", s.best25},   {"worst25", s.worst25}, {"worst5", s.worst5},
                     {"n", s.n}};
}

void from_json(const nlohmann::json& j, ErrorSummary& s) {
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  s.trimean = j.at("trimean").get<double>();
  s.best25 = j.at("best25").get<double>();
  s.worst25 = j.at("worst25").get<double>();
  s.worst5 = j.at("worst5").get<double>();
  s.n = j.value("n", std::size_t{0});
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ErrorSummary summarize_errors(std::span<const double> errors) {
  if (errors.empty()) throw InputError("summarize_errors: empty error list");
  std::vector<double> s(errors.begin(), errors.end());
  if (std::any_of(s.begin(), s.end(), [](double e) { return !std::isfinite(e) || e < 0.0; }))
    throw InputError("summarize_errors: errors must be finite and nonnegative");
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const std::size_t quarter = (n + 3) / 4;
  const std::size_t twentieth = (n + 19) / 20;
  const std::span<const double> all(s);

  ErrorSummary out;
  out.n = n;
  out.mean = mean_of(all);
  out.median = quantile_sorted(all, 0.5);
  out.trimean =
      (quantile_sorted(all, 0.25) + 2.0 * out.median + quantile_sorted(all, 0.75)) / 4.0;
  out.best25 = mean_of(all.first(quarter));
  out.worst25 = mean_of(all.last(quarter));
  out.worst5 = mean_of(all.last(twentieth));
  return out;
}

double jsd(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size() || p.size() == 0)
    throw InputError("jsd: distributions must have the same nonzero length");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any() || !p.allFinite() || !q.allFinite())
    throw InputError("jsd: inputs must be finite and nonnegative");
  auto normalized = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const double s = v.sum();
    if (s > 0.0) return v / s;
    return Eigen::VectorXd::Constant(v.size(), 1.0 / static_cast<double>(v.size()));
  };
  const Eigen::VectorXd pn = normalized(p);
  const Eigen::VectorXd qn = normalized(q);
  const Eigen::VectorXd m = 0.5 * (pn + qn);
  auto kl_to_m = [&m](const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] > 0.0) acc += x[i] * std::log(x[i] / m[i]);
    return acc;
  };
  const double d = 0.5 * kl_to_m(pn) + 0.5 * kl_to_m(qn);
  return std::clamp(d, 0.0, std::log(2.0));
}

double bce(const SpatialMask& a, const SpatialMask& b) {
  require_same_shape(a, b, "bce");
  validate_mask(a);
  validate_mask(b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += pixel_bce(a(i), b(i));
  return acc / static_cast<double>(a.size());
}

double excess_bce(const SpatialMask& a, const SpatialMask& b) {
  require_same_shape(a, b, "excess_bce");
  validate_mask(a);
  validate_mask(b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += pixel_bce(a(i), b(i)) - pixel_bce(a(i), a(i));
  return std::max(0.0, acc / static_cast<double>(a.size()));
}

double ssim(const SpatialMask& a, const SpatialMask& b) {
  require_same_shape(a, b, "ssim");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const int rows = static_cast<int>(a.rows()), cols = static_cast<int>(a.cols());
  const int wy = std::min(11, rows), wx = std::min(11, cols);
  const Eigen::MatrixXd window = gaussian_window(wy) * gaussian_window(wx).transpose();

  // Identical expressions for a.a and a.b keep ssim(a, a) exactly 1.
  auto weighted = [&](const SpatialMask& x, const SpatialMask& y, int r, int c) {
    return (window.array() * x.block(r, c, wy, wx).array() * y.block(r, c, wy, wx).array()).sum();
  };
  auto weighted_mean = [&](const SpatialMask& x, int r, int c) {
    return (window.array() * x.block(r, c, wy, wx).array()).sum();
  };

  double total = 0.0;
  int positions = 0;
  for (int r = 0; r + wy <= rows; ++r)
    for (int c = 0; c + wx <= cols; ++c) {
      const double mu_a = weighted_mean(a, r, c);
      const double mu_b = weighted_mean(b, r, c);
      const double var_a = weighted(a, a, r, c) - mu_a * mu_a;
      const double var_b = weighted(b, b, r, c) - mu_b * mu_b;
      const double cov = weighted(a, b, r, c) - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++positions;
    }
  return total / positions;
}

double soft_iou(const SpatialMask& a, const SpatialMask& b) {
  require_same_shape(a, b, "soft_iou");
  const double inter = a.cwiseMin(b).sum();
  const double uni = a.cwiseMax(b).sum();
  if (uni == 0.0) return 1.0;
  return inter / uni;
}

std::vector<double> spatial_divergence_frames(std::span<const SpatialMask> a,
                                              std::span<const SpatialMask> b,
                                              DivergenceScale scale) {
  if (a.size() != b.size() || a.empty())
    throw InputError("spatial_divergence: mask lists must have equal nonzero length");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    double cross = excess_bce(a[f], b[f]);
    if (scale == DivergenceScale::PaperScale) cross *= static_cast<double>(a[f].size());
    out.push_back(cross + (1.0 - ssim(a[f], b[f])) + (1.0 - soft_iou(a[f], b[f])));
  }
  return out;
}

double spatial_divergence(std::span<const SpatialMask> a, std::span<const SpatialMask> b,
                          DivergenceScale scale) {
  const std::vector<double> frames = spatial_divergence_frames(a, b, scale);
  const double total = std::accumulate(frames.begin(), frames.end(), 0.0);
  return scale == DivergenceScale::Bounded ? total / static_cast<double>(frames.size()) : total;
}

double temporal_divergence(const TemporalWeights& a, const TemporalWeights& b) {
  if (a.weights.size() != b.weights.size())
    throw InputError("temporal_divergence: weight vectors differ in length");
  return jsd(a.weights, b.weights);
}

void to_json(nlohmann::json& j, const DivergenceReport& d) {
  j = nlohmann::json{{"temporal", d.temporal},
                     {"spatial", d.spatial},
                     {"spatiotemporal", d.spatiotemporal},
                     {"perFrameSpatial", d.perFrameSpatial}};
}

void from_json(const nlohmann::json& j, DivergenceReport& d) {
  d.temporal = j.at("temporal").get<double>();
  d.spatial = j.at("spatial").get<double>();
  d.spatiotemporal = j.at("spatiotemporal").get<double>();
  d.perFrameSpatial = j.value("perFrameSpatial", std::vector<double>{});
}

DivergenceReport divergence_report(std::span<const SpatialMask> spatial_a,
                                   const std::optional<TemporalWeights>& temporal_a,
                                   std::span<const SpatialMask> spatial_b,
                                   const std::optional<TemporalWeights>& temporal_b,
                                   DivergenceScale scale) {
  if (spatial_a.empty() != spatial_b.empty() || temporal_a.has_value() != temporal_b.has_value())
    throw InputError("divergence_report: saliency sets cover different dimensions");
  DivergenceReport r;
  if (!spatial_a.empty()) {
    r.perFrameSpatial = spatial_divergence_frames(spatial_a, spatial_b, scale);
    const double total = std::accumulate(r.perFrameSpatial.begin(), r.perFrameSpatial.end(), 0.0);
    r.spatial = scale == DivergenceScale::Bounded
                    ? total / static_cast<double>(r.perFrameSpatial.size())
                    : total;
  }
  if (temporal_a) r.temporal = temporal_divergence(*temporal_a, *temporal_b);
  r.spatiotemporal = r.temporal + r.spatial;
  return r;
}

DivergenceReport mean_report(std::span<const DivergenceReport> items) {
  DivergenceReport out;
  if (items.empty()) return out;
  for (const DivergenceReport& r : items) {
    out.temporal += r.temporal;
    out.spatial += r.spatial;
    out.perFrameSpatial.insert(out.perFrameSpatial.end(), r.perFrameSpatial.begin(),
                               r.perFrameSpatial.end());
  }
  const double n = static_cast<double>(items.size());
  out.temporal /= n;
  out.spatial /= n;
  out.spatiotemporal = out.temporal + out.spatial;
  return out;
}

}  // namespace faithful
