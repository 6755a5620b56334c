#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xfer/image.hpp"

namespace xfer {

struct LabeledImage {
  std::string id;  // path relative to the dataset root, '/'-separated
  Image image;
  std::size_t label = 0;
  friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

/// Labeled images plus the class-name table. Items are kept sorted by id;
/// ids are unique and every label indexes `class_names`.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<LabeledImage> items, std::vector<std::string> class_names);

  const std::vector<LabeledImage>& items() const { return items_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t class_count() const { return class_names_.size(); }
  const LabeledImage& operator[](std::size_t i) const { return items_[i]; }

  std::vector<std::size_t> labels() const;
  std::vector<std::size_t> class_counts() const;
  /// Keeps only the named classes, relabeled in the order given.
  Dataset select_classes(std::span<const std::string> names) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<LabeledImage> items_;
  std::vector<std::string> class_names_;
};

// --- PPM (binary P6, maxval 255) ---

/// Throws DecodeError with the byte offset of the first problem.
Image decode_ppm(std::span<const std::uint8_t> bytes);
Image decode_ppm(const std::string& bytes);
/// Canonical "P6\n<w> <h>\n255\n" header; channels quantized to round(v*255).
std::string encode_ppm(const Image& img);

/// Bilinear resampling with half-pixel centers:
/// src = (dst + 0.5) * in / out - 0.5, clamped to the image.
Image resize_bilinear(const Image& img, std::size_t out_w, std::size_t out_h);

// --- directory ingestion ---

struct IngestOptions {
  /// Resize every image to (width, height) when set.
  std::optional<std::pair<std::size_t, std::size_t>> resize;
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<SkippedFile> skipped;
};

/// Every immediate subdirectory of `root` is a class, indexed by the
/// lexicographic rank of its name. Undecodable files are skipped and
/// reported; an empty tree is a UsageError.
IngestResult ingest_directory(const std::filesystem::path& root, const IngestOptions& opts = {});

/// Writes `root/<class>/<file>.ppm` for every item plus `root/manifest.csv`.
void write_dataset(const Dataset& ds, const std::filesystem::path& root);

/// `path,class_name,label_index`, one row per item, LF endings.
std::string manifest_csv(const Dataset& ds);

// --- splitting ---

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct Split {
  Dataset train;
  Dataset test;
};

/// Per-class seeded shuffle; round(test_fraction * n_c) items of each class
/// (clamped to [1, n_c - 1]) go to the test side.
Split stratified_split(const Dataset& ds, const SplitSpec& spec);

// --- synthetic stand-in data ---

/// Class names produced by synth_shapes, lexicographically ordered.
std::vector<std::string> shape_class_names();

/// Five classes of side x side images (filled circle, plus-cross, square
/// outline, horizontal stripes, filled triangle) with seeded jitter in
/// position, scale and gray level. Channel values are multiples of 1/255 so
/// a PPM round trip is lossless.
Dataset synth_shapes(std::size_t per_class, std::size_t side, std::uint64_t seed);

}  // namespace xfer
