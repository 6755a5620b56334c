#include <doctest.h>

#include <filesystem>

#include "xfer/dataset.hpp"
#include "xfer/error.hpp"
#include "xfer/rng.hpp"
#include "xfer/transfer.hpp"

using namespace xfer;

namespace {

struct Fixture {
  Dataset data = synth_shapes(6, 16, 4);
  Network net = make_cnn(CnnSpec{Shape{3, 16, 16}, {4}, 10, 3}, 12);
};

}  // namespace

TEST_CASE("extract_bottlenecks") {
  Fixture f;
  const auto cache = extract_bottlenecks(f.net, f.data);
  CHECK(cache.size() == f.data.size());
  CHECK(cache.length == 10);
  for (std::size_t i = 0; i < cache.size(); ++i) {
    CHECK(cache.ids[i] == f.data[i].id);
    CHECK(cache.features[i].size() == 10);
    CHECK(cache.features[i] == run_layers(f.net, f.data[i].image.to_volume(), *f.net.head_index()).data());
  }
  CHECK_NOTHROW(require_fresh(cache, f.net));
}

TEST_CASE("fingerprint tracks every frozen weight and ignores the head") {
  Fixture f;
  const std::string base = prefix_fingerprint(f.net);
  CHECK(base.size() == 64);
  CHECK(prefix_fingerprint(f.net) == base);
  const auto cache = extract_bottlenecks(f.net, f.data);

  const std::size_t head = *f.net.head_index();
  const auto frozen = f.net.parameter_blocks(0, head);
  std::size_t frozen_blocks = frozen.size();
  for (std::size_t b = 0; b < frozen_blocks; ++b) {
    Network mutated = f.net;
    auto blocks = mutated.parameter_blocks();
    blocks[b][blocks[b].size() / 2] += 1e-12;
    CHECK(prefix_fingerprint(mutated) != base);
    CHECK_THROWS_AS(require_fresh(cache, mutated), StaleCacheError);
  }
  Network head_only = f.net;
  head_only.parameter_blocks().back()[0] += 1.0;
  CHECK(prefix_fingerprint(head_only) == base);
}

TEST_CASE("bottleneck cache file round trip") {
  Fixture f;
  const auto cache = extract_bottlenecks(f.net, f.data);
  const std::string text = bottlenecks_to_json(cache);
  CHECK(bottlenecks_from_json(text) == cache);
  CHECK(bottlenecks_to_json(bottlenecks_from_json(text)) == text);

  const auto dir = std::filesystem::temp_directory_path() / "xfer_test_cache";
  std::filesystem::remove_all(dir);
  save_bottlenecks(cache, dir / "b.json");
  CHECK(load_bottlenecks(dir / "b.json") == cache);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(bottlenecks_from_json("{}"), DataError);
}

TEST_CASE("retrain_head on linearly separable features") {
  BottleneckCache cache;
  cache.fingerprint = "synthetic";
  cache.length = 3;
  std::vector<std::size_t> labels;
  Rng rng(8);
  for (std::size_t i = 0; i < 40; ++i) {
    const std::size_t label = i % 2;
    const double centre = label == 0 ? -2.0 : 2.0;
    cache.ids.push_back("item" + std::to_string(i));
    cache.features.push_back({centre + rng.uniform(-1, 1), centre + rng.uniform(-1, 1),
                              rng.uniform(-1, 1)});
    labels.push_back(label);
  }
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.seed = 1;
  const auto r = retrain_head(cache, labels, cache, labels, 2, cfg);
  CHECK(r.log.epochs.size() == 100);
  CHECK(r.log.epochs.back().train_accuracy == 1.0);
  CHECK(r.head.out_units == 2);
  CHECK(r.head.in_units == 3);

  auto bad = labels;
  bad[0] = 2;
  CHECK_THROWS_AS(retrain_head(cache, bad, cache, labels, 2, cfg), DataError);
  CHECK_THROWS_AS(retrain_head(BottleneckCache{}, {}, cache, labels, 2, cfg), UsageError);
}

TEST_CASE("head retraining leaves the feature extractor untouched") {
  Fixture f;
  const std::string before = prefix_fingerprint(f.net);
  const Network snapshot = f.net;
  const auto cache = extract_bottlenecks(f.net, f.data);
  const auto labels = f.data.labels();
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  const auto r = retrain_head(cache, labels, cache, labels, f.data.class_count(), cfg);
  CHECK(prefix_fingerprint(f.net) == before);
  CHECK(f.net == snapshot);

  const Network retrained = attach_head(f.net, r.head);
  CHECK(prefix_fingerprint(retrained) == before);
  CHECK(retrained.class_count() == f.data.class_count());
  CHECK(retrained.head_index() == f.net.head_index());
}

TEST_CASE("cached and on-the-fly features train identical heads") {
  Fixture f;
  const auto cache = extract_bottlenecks(f.net, f.data);
  const auto labels = f.data.labels();
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 5;
  cfg.seed = 77;
  const auto from_cache = retrain_head(CacheSource(cache, labels), CacheSource(cache, labels),
                                       cache.length, 5, cfg);
  const auto online = retrain_head(PrefixSource(f.net, f.data, labels),
                                   PrefixSource(f.net, f.data, labels), cache.length, 5, cfg);
  CHECK(from_cache.head == online.head);
  CHECK(from_cache.log == online.log);
}
