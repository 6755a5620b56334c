#include "xfer/augment.hpp"

#include <cmath>
#include <numbers>

#include "xfer/error.hpp"
#include "xfer/rng.hpp"

namespace xfer {

void AugmentSpec::validate() const {
  if (!std::isfinite(rotation_degrees)) throw UsageError("rotation must be finite");
  if (!(translation_fraction >= 0.0 && translation_fraction <= 0.5)) {
    throw UsageError("translation fraction must lie in [0, 0.5]");
  }
  if (!(lighting_factor > 0.0)) throw UsageError("lighting factor must be positive");
  for (double c : {fill.r, fill.g, fill.b}) {
    if (!(c >= 0.0 && c <= 1.0)) throw UsageError("fill color channels must lie in [0, 1]");
  }
}

namespace {

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return Rgb{a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

Rgb tap(const Image& img, long x, long y, const Rgb& fill) {
  if (x < 0 || y < 0 || x >= static_cast<long>(img.width()) ||
      y >= static_cast<long>(img.height())) {
    return fill;
  }
  return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
}

Rgb clamped(const Rgb& p) { return Rgb{clamp01(p.r), clamp01(p.g), clamp01(p.b)}; }

}  // namespace

Image rotate(const Image& img, double degrees, Rgb fill) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  Image out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      // Inverse map: counter-clockwise as displayed (y axis points down).
      const double sx = cx + (c * dx - s * dy);
      const double sy = cy + (s * dx + c * dy);
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const auto x0 = static_cast<long>(fx);
      const auto y0 = static_cast<long>(fy);
      const double tx = sx - fx;
      const double ty = sy - fy;
      const Rgb top = lerp(tap(img, x0, y0, fill), tap(img, x0 + 1, y0, fill), tx);
      const Rgb bottom = lerp(tap(img, x0, y0 + 1, fill), tap(img, x0 + 1, y0 + 1, fill), tx);
      out.at(x, y) = clamped(lerp(top, bottom, ty));
    }
  }
  return out;
}

Image translate(const Image& img, long dx, long dy, Rgb fill) {
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  if (std::abs(dx) >= w || std::abs(dy) >= h) {
    throw UsageError("translation (" + std::to_string(dx) + ", " + std::to_string(dy) +
                     ") does not fit a " + std::to_string(w) + "x" + std::to_string(h) + " image");
  }
  Image out(img.width(), img.height(), fill);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const long sx = x - dx;
      const long sy = y - dy;
      if (sx >= 0 && sy >= 0 && sx < w && sy < h) {
        out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
            img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
      }
    }
  }
  return out;
}

Image adjust_lighting(const Image& img, double factor) {
  if (!(factor > 0.0)) throw UsageError("lighting factor must be positive");
  Image out = img;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      Rgb& p = out.at(x, y);
      p = Rgb{std::min(1.0, p.r * factor), std::min(1.0, p.g * factor),
              std::min(1.0, p.b * factor)};
    }
  }
  return out;
}

Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  const std::size_t w = img.width();
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < w; ++x) out.at(x, y) = img.at(w - 1 - x, y);
  }
  return out;
}

std::pair<long, long> translation_for(const std::string& id, std::size_t width,
                                      std::size_t height, double fraction, std::uint64_t seed) {
  Rng rng(mix64(seed ^ fnv1a64(id)));
  const auto max_dx = static_cast<long>(std::floor(fraction * static_cast<double>(width)));
  const auto max_dy = static_cast<long>(std::floor(fraction * static_cast<double>(height)));
  const long dx = rng.uniform_int(-max_dx, max_dx);
  const long dy = rng.uniform_int(-max_dy, max_dy);
  return {dx, dy};
}

namespace {

std::string stem_of(const std::string& id) {
  const auto slash = id.rfind('/');
  const auto dot = id.rfind('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return id;
  return id.substr(0, dot);
}

}  // namespace

Dataset augment_dataset(const Dataset& ds, const AugmentSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (ds.empty()) throw UsageError("cannot augment an empty dataset");
  std::vector<LabeledImage> out;
  out.reserve(ds.size() * kVariants.size());
  for (const auto& item : ds.items()) {
    const std::string stem = stem_of(item.id);
    const auto [dx, dy] = translation_for(item.id, item.image.width(), item.image.height(),
                                          spec.translation_fraction, seed);
    const auto add = [&](std::string_view variant, Image img) {
      out.push_back(LabeledImage{stem + "__" + std::string(variant) + ".ppm", std::move(img),
                                 item.label});
    };
    add("flip", flip_horizontal(item.image));
    add("light", adjust_lighting(item.image, spec.lighting_factor));
    add("orig", item.image);
    add("rot+30", rotate(item.image, spec.rotation_degrees, spec.fill));
    add("rot-30", rotate(item.image, -spec.rotation_degrees, spec.fill));
    add("trans", translate(item.image, dx, dy, spec.fill));
  }
  return Dataset(std::move(out), ds.class_names());
}

Provenance provenance_of(const std::string& augmented_id) {
  const std::string stem = stem_of(augmented_id);
  const auto sep = stem.rfind("__");
  if (sep == std::string::npos) throw DataError("'" + augmented_id + "' is not an augmented id");
  return Provenance{stem.substr(0, sep) + ".ppm", stem.substr(sep + 2)};
}

std::string augment_manifest_csv(const Dataset& augmented) {
  std::string out = "output_path,source_path,variant,label\n";
  for (const auto& item : augmented.items()) {
    const auto p = provenance_of(item.id);
    out += item.id + "," + p.source + "," + p.variant + "," + std::to_string(item.label) + "\n";
  }
  return out;
}

}  // namespace xfer
