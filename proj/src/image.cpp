#include "xfer/image.hpp"

#include <algorithm>

#include "xfer/error.hpp"

namespace xfer {

Image::Image(std::size_t width, std::size_t height, Rgb fill) : width_(width), height_(height) {
  if (width == 0 || height == 0) throw UsageError("image dimensions must be >= 1");
  pixels_.assign(width * height, fill);
}

Volume Image::to_volume() const {
  Volume v(3, height_, width_);
  for (std::size_t y = 0; y < height_; ++y) {
    for (std::size_t x = 0; x < width_; ++x) {
      const Rgb& p = at(x, y);
      v.at(0, y, x) = p.r;
      v.at(1, y, x) = p.g;
      v.at(2, y, x) = p.b;
    }
  }
  return v;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace xfer
