#include "faithful/types.hpp"

#include "faithful/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace faithful {

Eigen::Vector3d make_illuminant(const Eigen::Vector3d& rgb) {
  if (!rgb.allFinite() || (rgb.array() < 0.0).any())
    throw InputError("illuminant components must be finite and nonnegative");
  const double n = rgb.norm();
  if (n == 0.0) throw InputError("illuminant must be nonzero");
  // Already unit up to rounding.
  if (std::fabs(n - 1.0) <= 8 * std::numeric_limits<double>::epsilon()) return rgb;
  return rgb / n;
}

void validate_mask(const SpatialMask& mask) {
  if (!mask.allFinite() || (mask.array() < 0.0).any() || (mask.array() > 1.0).any())
    throw InputError("spatial mask values must lie in [0, 1]");
}

Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& src, int rows, int cols) {
  if (rows <= 0 || cols <= 0 || src.size() == 0) throw InputError("resize_bilinear: empty shape");
  if (src.rows() == rows && src.cols() == cols) return src;
  Eigen::MatrixXd out(rows, cols);
  const double sy = static_cast<double>(src.rows()) / rows;
  const double sx = static_cast<double>(src.cols()) / cols;
  const int max_r = static_cast<int>(src.rows()) - 1;
  const int max_c = static_cast<int>(src.cols()) - 1;
  for (int r = 0; r < rows; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(max_r));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, max_r);
    const double wy = fy - y0;
    for (int c = 0; c < cols; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(max_c));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, max_c);
      const double wx = fx - x0;
      out(r, c) = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                  wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
    }
  }
  return out;
}

}  // namespace faithful
