#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "xfer/dataset.hpp"
#include "xfer/image.hpp"

namespace xfer {

struct AugmentSpec {
  double rotation_degrees = 30.0;
  double translation_fraction = 0.1;  // max |shift| as a fraction of each dimension
  double lighting_factor = 1.25;
  Rgb fill{};

  void validate() const;
};

/// Variant tags appended to augmented item names, in output order.
inline constexpr std::array<std::string_view, 6> kVariants = {"flip",   "light",  "orig",
                                                              "rot+30", "rot-30", "trans"};

/// Rotation about the image center, bilinear sampling, same canvas size.
/// Samples whose taps fall outside the frame read `fill`.
Image rotate(const Image& img, double degrees, Rgb fill = {});

/// out(x, y) = in(x - dx, y - dy); uncovered pixels become `fill`.
/// Throws UsageError if |dx| >= width or |dy| >= height.
Image translate(const Image& img, long dx, long dy, Rgb fill = {});

/// channel <- min(1, channel * factor). Throws UsageError if factor <= 0.
Image adjust_lighting(const Image& img, double factor);

/// Mirror about the vertical axis.
Image flip_horizontal(const Image& img);

/// Integer shift (dx, dy) drawn for one source image; depends only on the
/// seed and the item id.
std::pair<long, long> translation_for(const std::string& id, std::size_t width,
                                      std::size_t height, double fraction, std::uint64_t seed);

/// Original plus five variants per image: rot+30, rot-30, trans, light,
/// flip. Output ids are `<dir>/<stem>__<variant>.ppm`; labels are kept.
Dataset augment_dataset(const Dataset& ds, const AugmentSpec& spec, std::uint64_t seed);

/// Source id an augmented id was derived from, and its variant tag.
struct Provenance {
  std::string source;
  std::string variant;
};
Provenance provenance_of(const std::string& augmented_id);

/// `output_path,source_path,variant,label`, one row per augmented item.
std::string augment_manifest_csv(const Dataset& augmented);

}  // namespace xfer
