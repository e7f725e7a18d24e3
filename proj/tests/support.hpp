#pragma once

#include "faithful/autodiff.hpp"
#include "faithful/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace testing {

using faithful::ad::Var;

inline Var random_param(faithful::Rng& rng, faithful::ad::Shape shape, double scale = 1.0) {
  Eigen::ArrayXd v(faithful::ad::element_count(shape));
  for (auto& x : v) x = scale * rng.normal();
  return faithful::ad::parameter(v, std::move(shape));
}

inline Var random_const(faithful::Rng& rng, faithful::ad::Shape shape, double scale = 1.0) {
  Eigen::ArrayXd v(faithful::ad::element_count(shape));
  for (auto& x : v) x = scale * rng.normal();
  return faithful::ad::constant(v, std::move(shape));
}

/// Largest per-tensor relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
/// between backprop and central differences of the scalar `f`.
/// With `per_tensor` > 0 only that many evenly spaced entries of each tensor
/// are compared. `floor` bounds the denominator from below, so tensors whose
/// gradient is below it are judged on absolute error.
inline double max_grad_error(const std::vector<Var>& params, const std::function<Var()>& f, double h = 1e-6,
                             int per_tensor = 0, double floor = 1e-8) {
  for (Var p : params) p.zero_grad();
  faithful::ad::backward(f());
  double worst = 0.0;
  for (Var p : params) {
    std::vector<int> idx;
    const int step = per_tensor > 0 ? std::max(1, p.size() / per_tensor) : 1;
    for (int i = 0; i < p.size(); i += step) idx.push_back(i);
    Eigen::ArrayXd analytic(idx.size()), numeric(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int i = idx[k];
      analytic[k] = p.grad()[i];
      const double keep = p.value()[i];
      p.mutable_value()[i] = keep + h;
      const double up = f().item();
      p.mutable_value()[i] = keep - h;
      const double down = f().item();
      p.mutable_value()[i] = keep;
      numeric[k] = (up - down) / (2.0 * h);
    }
    const double scale = std::max({analytic.matrix().norm(), numeric.matrix().norm(), floor});
    worst = std::max(worst, (analytic - numeric).matrix().norm() / scale);
  }
  return worst;
}

/// Contracts any Var with fixed random weights to a scalar.
inline Var probe(const Var& x, std::uint64_t seed) {
  faithful::Rng rng(seed);
  Eigen::ArrayXd w(x.size());
  for (auto& v : w) v = rng.normal();
  return faithful::ad::sum(faithful::ad::mul(x, faithful::ad::constant(w, x.shape())));
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("faithful_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
