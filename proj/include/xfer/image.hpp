#pragma once

#include <cstddef>
#include <vector>

#include "xfer/volume.hpp"

namespace xfer {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// RGB raster, row-major, each channel in [0, 1].
class Image {
 public:
  Image() = default;
  /// Throws UsageError on zero dimensions.
  Image(std::size_t width, std::size_t height, Rgb fill = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  const std::vector<Rgb>& pixels() const { return pixels_; }

  /// 3 x height x width volume, channels in r, g, b order.
  Volume to_volume() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> pixels_;
};

double clamp01(double v);

}  // namespace xfer
