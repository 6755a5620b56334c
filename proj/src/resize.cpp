#include <algorithm>
#include <cmath>

#include "xfer/dataset.hpp"
#include "xfer/error.hpp"

namespace xfer {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double t;
};

Tap tap(std::size_t dst, std::size_t in, std::size_t out) {
  double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(in) /
                 static_cast<double>(out) -
             0.5;
  s = std::clamp(s, 0.0, static_cast<double>(in - 1));
  const auto lo = static_cast<std::size_t>(std::floor(s));
  const std::size_t hi = std::min(lo + 1, in - 1);
  return Tap{lo, hi, s - static_cast<double>(lo)};
}

// a + (b - a) * t keeps constant regions exact.
Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return Rgb{a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

}  // namespace

Image resize_bilinear(const Image& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw UsageError("resize target dimensions must be >= 1");
  if (img.empty()) throw UsageError("cannot resize an empty image");
  Image out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap ty = tap(y, img.height(), out_h);
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap tx = tap(x, img.width(), out_w);
      const Rgb top = lerp(img.at(tx.lo, ty.lo), img.at(tx.hi, ty.lo), tx.t);
      const Rgb bottom = lerp(img.at(tx.lo, ty.hi), img.at(tx.hi, ty.hi), tx.t);
      const Rgb v = lerp(top, bottom, ty.t);
      out.at(x, y) = Rgb{clamp01(v.r), clamp01(v.g), clamp01(v.b)};
    }
  }
  return out;
}

}  // namespace xfer
