#include <cmath>
#include <cstdio>

#include "xfer/dataset.hpp"
#include "xfer/error.hpp"
#include "xfer/rng.hpp"

namespace xfer {

namespace {

enum class ShapeKind { circle, cross, square, stripes, triangle };

struct Jitter {
  double cx, cy;  // center
  double r;       // half-size
  double t;       // stroke half-thickness
  double fg, bg;  // gray levels
  double period;  // stripes only
};

double quantize(double v) { return std::round(clamp01(v) * 255.0) / 255.0; }

bool inside(ShapeKind kind, const Jitter& j, double x, double y) {
  const double dx = x - j.cx;
  const double dy = y - j.cy;
  switch (kind) {
    case ShapeKind::circle:
      return dx * dx + dy * dy <= j.r * j.r;
    case ShapeKind::cross:
      return (std::abs(dx) <= j.t && std::abs(dy) <= j.r) ||
             (std::abs(dy) <= j.t && std::abs(dx) <= j.r);
    case ShapeKind::square: {
      const double m = std::max(std::abs(dx), std::abs(dy));
      return m <= j.r && m >= j.r - 2.0 * j.t;
    }
    case ShapeKind::stripes: {
      if (std::abs(dx) > j.r || std::abs(dy) > j.r) return false;
      const double phase = std::fmod(dy + j.r, j.period);
      return phase < j.period / 2.0;
    }
    case ShapeKind::triangle: {
      // Apex up, base at cy + r; half-width grows linearly from apex to base.
      if (dy < -j.r || dy > j.r) return false;
      const double half = (dy + j.r) / 2.0;
      return std::abs(dx) <= half;
    }
  }
  return false;
}

Image draw(ShapeKind kind, std::size_t side, Rng& rng) {
  const double s = static_cast<double>(side);
  Jitter j{};
  j.r = s * rng.uniform(0.22, 0.32);
  const double slack = s / 2.0 - j.r - 1.0;
  j.cx = (s - 1.0) / 2.0 + rng.uniform(-0.5, 0.5) * slack;
  j.cy = (s - 1.0) / 2.0 + rng.uniform(-0.5, 0.5) * slack;
  j.t = std::max(1.0, s * rng.uniform(0.04, 0.06));
  j.fg = rng.uniform(0.6, 1.0);
  j.bg = rng.uniform(0.0, 0.2);
  j.period = std::max(4.0, std::round(s * rng.uniform(0.12, 0.18)));

  Image img(side, side);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double noise = rng.uniform(-0.03, 0.03);
      const double g =
          quantize((inside(kind, j, static_cast<double>(x), static_cast<double>(y)) ? j.fg : j.bg) +
                   noise);
      img.at(x, y) = Rgb{g, g, g};
    }
  }
  return img;
}

}  // namespace

std::vector<std::string> shape_class_names() {
  return {"circle", "cross", "square", "stripes", "triangle"};
}

Dataset synth_shapes(std::size_t per_class, std::size_t side, std::uint64_t seed) {
  if (per_class == 0) throw UsageError("per-class count must be >= 1");
  if (side < 16) throw UsageError("synthetic image side must be >= 16");
  const auto names = shape_class_names();
  const ShapeKind kinds[] = {ShapeKind::circle, ShapeKind::cross, ShapeKind::square,
                             ShapeKind::stripes, ShapeKind::triangle};
  std::vector<LabeledImage> items;
  items.reserve(per_class * names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(mix64(seed ^ mix64((c << 32) | i)));
      char file[64];
      std::snprintf(file, sizeof file, "%s_%04zu.ppm", names[c].c_str(), i);
      items.push_back(LabeledImage{names[c] + "/" + file, draw(kinds[c], side, rng), c});
    }
  }
  return Dataset(std::move(items), names);
}

}  // namespace xfer
