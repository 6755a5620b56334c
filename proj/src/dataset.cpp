#include "xfer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xfer/error.hpp"
#include "xfer/io.hpp"
#include "xfer/rng.hpp"

namespace xfer {

namespace fs = std::filesystem;

Dataset::Dataset(std::vector<LabeledImage> items, std::vector<std::string> class_names)
    : items_(std::move(items)), class_names_(std::move(class_names)) {
  std::set<std::string> names(class_names_.begin(), class_names_.end());
  if (names.size() != class_names_.size()) throw DataError("duplicate class names");
  std::sort(items_.begin(), items_.end(),
            [](const LabeledImage& a, const LabeledImage& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].label >= class_names_.size()) {
      throw DataError("item '" + items_[i].id + "' has label " + std::to_string(items_[i].label) +
                      " but only " + std::to_string(class_names_.size()) + " classes exist");
    }
    if (i > 0 && items_[i].id == items_[i - 1].id) {
      throw DataError("duplicate item id '" + items_[i].id + "'");
    }
  }
}

std::vector<std::size_t> Dataset::labels() const {
  std::vector<std::size_t> out;
  out.reserve(items_.size());
  for (const auto& it : items_) out.push_back(it.label);
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names_.size(), 0);
  for (const auto& it : items_) ++counts[it.label];
  return counts;
}

Dataset Dataset::select_classes(std::span<const std::string> names) const {
  std::vector<std::size_t> remap(class_names_.size(), names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto it = std::find(class_names_.begin(), class_names_.end(), names[k]);
    if (it == class_names_.end()) throw UsageError("unknown class '" + names[k] + "'");
    remap[static_cast<std::size_t>(it - class_names_.begin())] = k;
  }
  std::vector<LabeledImage> kept;
  for (const auto& item : items_) {
    if (remap[item.label] < names.size()) {
      kept.push_back(item);
      kept.back().label = remap[item.label];
    }
  }
  return Dataset(std::move(kept), std::vector<std::string>(names.begin(), names.end()));
}

IngestResult ingest_directory(const fs::path& root, const IngestOptions& opts) {
  if (!fs::is_directory(root)) throw UsageError("dataset root '" + root.string() + "' is not a directory");
  std::vector<std::string> classes;
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && !name.starts_with(".")) classes.push_back(name);
  }
  std::sort(classes.begin(), classes.end());

  IngestResult result;
  std::vector<LabeledImage> items;
  for (std::size_t label = 0; label < classes.size(); ++label) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / classes[label])) {
      if (entry.is_regular_file() && !entry.path().filename().string().starts_with(".")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string id = classes[label] + "/" + file.filename().string();
      try {
        Image img = decode_ppm(read_file(file));
        if (opts.resize) img = resize_bilinear(img, opts.resize->first, opts.resize->second);
        items.push_back(LabeledImage{id, std::move(img), label});
      } catch (const DataError& e) {
        result.skipped.push_back(SkippedFile{id, e.what()});
      }
    }
  }
  if (items.empty()) {
    throw UsageError("no decodable images under '" + root.string() +
                     "' (expected root/<class>/<image>.ppm)");
  }
  result.dataset = Dataset(std::move(items), std::move(classes));
  return result;
}

std::string manifest_csv(const Dataset& ds) {
  std::string out = "path,class_name,label_index\n";
  for (const auto& item : ds.items()) {
    out += item.id + "," + ds.class_names()[item.label] + "," + std::to_string(item.label) + "\n";
  }
  return out;
}

void write_dataset(const Dataset& ds, const fs::path& root) {
  for (const auto& name : ds.class_names()) fs::create_directories(root / name);
  for (const auto& item : ds.items()) write_file_atomic(root / item.id, encode_ppm(item.image));
  write_file_atomic(root / "manifest.csv", manifest_csv(ds));
}

Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
  if (ds.size() < 2) throw UsageError("cannot split fewer than 2 items");

  std::vector<bool> to_test(ds.size(), false);
  const auto pick = [&](std::vector<std::size_t>& idx, std::uint64_t seed) {
    Rng rng(seed);
    rng.shuffle(std::span(idx));
    const auto n = static_cast<double>(idx.size());
    auto k = static_cast<std::size_t>(std::llround(spec.test_fraction * n));
    k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
    for (std::size_t i = 0; i < k; ++i) to_test[idx[i]] = true;
  };

  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> per_class(ds.class_count());
    for (std::size_t i = 0; i < ds.size(); ++i) per_class[ds[i].label].push_back(i);
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      if (per_class[c].empty()) continue;
      if (per_class[c].size() < 2) {
        throw UsageError("class '" + ds.class_names()[c] + "' has only " +
                         std::to_string(per_class[c].size()) + " item; stratified split needs 2");
      }
      pick(per_class[c], mix64(spec.seed ^ mix64(c)));
    }
  } else {
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    pick(all, mix64(spec.seed));
  }

  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
  for (std::size_t i = 0; i < ds.size(); ++i) (to_test[i] ? test : train).push_back(ds[i]);
  return Split{Dataset(std::move(train), ds.class_names()),
               Dataset(std::move(test), ds.class_names())};
}

}  // namespace xfer
