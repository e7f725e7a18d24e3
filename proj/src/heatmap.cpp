#include "faithful/heatmap.hpp"

#include "faithful/error.hpp"
#include "faithful/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace faithful {

namespace {

constexpr std::array<std::array<double, 3>, 17> kViridis = {{
    {0.267004, 0.004874, 0.329415},
    {0.282327, 0.094955, 0.417331},
    {0.278826, 0.175490, 0.483397},
    {0.258965, 0.251537, 0.524736},
    {0.229739, 0.322361, 0.545706},
    {0.199430, 0.387607, 0.554642},
    {0.172719, 0.448791, 0.557885},
    {0.149039, 0.508051, 0.557250},
    {0.127568, 0.566949, 0.550556},
    {0.120638, 0.625828, 0.533488},
    {0.157851, 0.683765, 0.501686},
    {0.246070, 0.738910, 0.452024},
    {0.369214, 0.788888, 0.382914},
    {0.515992, 0.831158, 0.294279},
    {0.678489, 0.863742, 0.189503},
    {0.845561, 0.887322, 0.099702},
    {0.993248, 0.906157, 0.143936},
}};

}  // namespace

Eigen::Vector3d viridis(double v) {
  const double t = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0) * (kViridis.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(t), kViridis.size() - 2);
  const double f = t - static_cast<double>(i);
  Eigen::Vector3d out;
  for (int c = 0; c < 3; ++c) out[c] = (1.0 - f) * kViridis[i][c] + f * kViridis[i + 1][c];
  return out;
}

Image heatmap_overlay(const Image& frame, const SpatialMask& mask, double alpha) {
  if (frame.channels != 3) throw ShapeError("heatmap frame must be RGB");
  if (mask.size() == 0) throw InputError("heatmap mask is empty");
  const Eigen::MatrixXd up = resize_bilinear(mask, frame.height, frame.width);
  Image out(3, frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      const Eigen::Vector3d colour = viridis(up(y, x));
      for (int c = 0; c < 3; ++c)
        out.at(c, y, x) = (1.0 - alpha) * frame.at(c, y, x) + alpha * colour[c];
    }
  return out;
}

void render_heatmap(const Image& frame, const SpatialMask& mask, const std::filesystem::path& out) {
  write_png(out, heatmap_overlay(frame, mask, 0.5));
}

}  // namespace faithful
