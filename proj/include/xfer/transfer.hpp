#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xfer/dataset.hpp"
#include "xfer/network.hpp"
#include "xfer/train.hpp"

namespace xfer {

/// SHA-256 (hex) over the input shape, the layer kinds and shapes, and the
/// raw parameter bytes of layers [0, head_index): the frozen feature
/// extractor. Any change to a frozen weight changes the fingerprint.
std::string prefix_fingerprint(const Network& net);

/// Feature-extractor outputs ("bottlenecks"), one vector per image id.
struct BottleneckCache {
  std::string fingerprint;
  std::size_t length = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> features;

  std::size_t size() const { return ids.size(); }
  friend bool operator==(const BottleneckCache&, const BottleneckCache&) = default;
};

/// Runs the frozen prefix once over every item of `ds`.
BottleneckCache extract_bottlenecks(const Network& net, const Dataset& ds);

/// Throws StaleCacheError unless `cache` was produced by this network's prefix.
void require_fresh(const BottleneckCache& cache, const Network& net);

/// Cache file: a JSON document with a header object (fingerprint, vector
/// length, count) and one row per image, keyed by image path.
std::string bottlenecks_to_json(const BottleneckCache& cache);
BottleneckCache bottlenecks_from_json(const std::string& text);
void save_bottlenecks(const BottleneckCache& cache, const std::filesystem::path& path);
BottleneckCache load_bottlenecks(const std::filesystem::path& path);

/// Cached features as training examples (n x 1 x 1 volumes).
class CacheSource final : public ExampleSource {
 public:
  CacheSource(const BottleneckCache& cache, std::span<const std::size_t> labels);
  std::size_t size() const override { return cache_.size(); }
  Volume input(std::size_t i) const override;
  std::size_t label(std::size_t i) const override { return labels_[i]; }

 private:
  const BottleneckCache& cache_;
  std::span<const std::size_t> labels_;
};

/// Features computed on demand by running the frozen prefix.
class PrefixSource final : public ExampleSource {
 public:
  PrefixSource(const Network& net, const Dataset& ds, std::span<const std::size_t> labels);
  std::size_t size() const override { return ds_.size(); }
  Volume input(std::size_t i) const override;
  std::size_t label(std::size_t i) const override { return labels_[i]; }

 private:
  const Network& net_;
  const Dataset& ds_;
  std::span<const std::size_t> labels_;
};

struct HeadResult {
  DenseParams head;
  EpochLog log;
};

/// Fresh Dense(class_count) + Softmax head over `length`-wide features,
/// initialized from config.seed and trained by SGD on cross-entropy. Only
/// the head's parameters change. Throws DataError on out-of-range labels.
HeadResult retrain_head(const ExampleSource& train, const ExampleSource& validation,
                        std::size_t length, std::size_t class_count, const TrainConfig& config,
                        const EpochCallback& on_epoch = {});

/// Convenience overload over cached features; `labels` index the cache rows.
HeadResult retrain_head(const BottleneckCache& train, std::span<const std::size_t> train_labels,
                        const BottleneckCache& validation,
                        std::span<const std::size_t> validation_labels, std::size_t class_count,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Feature extractor of `net` followed by `head` and a softmax.
Network attach_head(const Network& net, const DenseParams& head);

}  // namespace xfer
