#include "faithful/augment.hpp"

#include "faithful/error.hpp"

#include <cmath>

namespace faithful {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

double sample_bilinear(const Image& img, int c, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  auto px = [&](int yy, int xx) {
    return img.at(c, reflect(yy, img.height), reflect(xx, img.width));
  };
  return (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x0 + 1)) +
         fy * ((1 - fx) * px(y0 + 1, x0) + fx * px(y0 + 1, x0 + 1));
}

}  // namespace

AugmentParams draw_augment(Rng& rng) {
  AugmentParams p;
  p.angleDegrees = rng.uniform(-30.0, 30.0);
  p.crop = rng.uniform(0.8, 1.0);
  p.flip = rng.bernoulli(0.5);
  return p;
}

Image augment_frame(const Image& frame, const AugmentParams& params) {
  if (params.crop <= 0.0 || params.crop > 1.0) throw InputError("crop proportion must lie in (0, 1]");
  const int h = frame.height, w = frame.width;
  if (params.crop * std::min(h, w) < 1.0) throw InputError("crop leaves less than one pixel");
  if (params.is_identity()) return frame;

  const double theta = params.angleDegrees * M_PI / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double ch = params.crop * h, cw = params.crop * w;
  const double oy = 0.5 * (h - ch), ox = 0.5 * (w - cw);
  const double cy = 0.5 * h, cx = 0.5 * w;

  Image out(frame.channels, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Continuous coordinates of the output pixel centre, mapped back to the input.
      const double u = params.flip ? w - (x + 0.5) : x + 0.5;
      const double py = oy + (y + 0.5) * ch / h;
      const double px = ox + u * cw / w;
      const double dy = py - cy, dx = px - cx;
      const double sy = cy + sn * dx + cs * dy;
      const double sx = cx + cs * dx - sn * dy;
      for (int c = 0; c < frame.channels; ++c)
        out.at(c, y, x) = sample_bilinear(frame, c, sy - 0.5, sx - 0.5);
    }
  return out;
}

FrameSequence apply_augment(const FrameSequence& seq, const AugmentParams& params) {
  FrameSequence out;
  out.id = seq.id;
  out.illuminant = seq.illuminant;
  out.frames.reserve(seq.frames.size());
  for (const Image& f : seq.frames) out.frames.push_back(augment_frame(f, params));
  return out;
}

FrameSequence augment(const FrameSequence& seq, Rng& rng) {
  if (seq.frames.empty()) throw InputError("cannot augment an empty sequence");
  return apply_augment(seq, draw_augment(rng));
}

}  // namespace faithful
