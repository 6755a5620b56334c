#include "xfer/transfer.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <json.hpp>
#include <memory>

#include "xfer/error.hpp"
#include "xfer/io.hpp"

namespace xfer {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 unavailable");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  void update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, 8);
  }
  void update_doubles(std::span<const double> values) {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      update_u64(bits);
    }
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

void hash_shape(Sha256& h, const Shape& s) {
  h.update_u64(s.channels);
  h.update_u64(s.height);
  h.update_u64(s.width);
}

}  // namespace

std::string prefix_fingerprint(const Network& net) {
  const std::size_t head = net.require_head();
  Sha256 h;
  hash_shape(h, net.input_shape());
  for (std::size_t i = 0; i < head; ++i) {
    const std::string kind = layer_kind(net.layers()[i]);
    h.update(kind.data(), kind.size() + 1);
    hash_shape(h, net.output_shape(i));
    if (const auto* p = std::get_if<PoolSpec>(&net.layers()[i])) {
      h.update_u64(p->extent);
      h.update_u64(p->stride);
    } else if (const auto* c = std::get_if<ConvParams>(&net.layers()[i])) {
      h.update_u64(c->half_height);
      h.update_u64(c->half_width);
    }
  }
  for (const auto& block : net.parameter_blocks(0, head)) h.update_doubles(block);
  return h.hex();
}

BottleneckCache extract_bottlenecks(const Network& net, const Dataset& ds) {
  const std::size_t head = net.require_head();
  BottleneckCache cache;
  cache.fingerprint = prefix_fingerprint(net);
  cache.length = net.input_shape_of(head).size();
  cache.ids.reserve(ds.size());
  cache.features.reserve(ds.size());
  for (const auto& item : ds.items()) {
    cache.ids.push_back(item.id);
    cache.features.push_back(run_layers(net, item.image.to_volume(), head).data());
  }
  return cache;
}

void require_fresh(const BottleneckCache& cache, const Network& net) {
  const std::string current = prefix_fingerprint(net);
  if (cache.fingerprint != current) {
    throw StaleCacheError("bottleneck cache was built from a different feature extractor (cache " +
                          cache.fingerprint.substr(0, 12) + ", network " +
                          current.substr(0, 12) + ")");
  }
  if (cache.length != net.input_shape_of(net.require_head()).size()) {
    throw StaleCacheError("bottleneck cache vector length does not match the network");
  }
}

std::string bottlenecks_to_json(const BottleneckCache& cache) {
  using json = nlohmann::ordered_json;
  // One row per line keeps large caches diffable.
  std::string out = "{\n\"header\": " +
                    json{{"fingerprint", cache.fingerprint},
                         {"length", cache.length},
                         {"count", cache.size()}}
                        .dump() +
                    ",\n\"rows\": [";
  for (std::size_t i = 0; i < cache.size(); ++i) {
    out += i == 0 ? "\n" : ",\n";
    out += json{{"path", cache.ids[i]}, {"features", cache.features[i]}}.dump();
  }
  out += "\n]\n}\n";
  return out;
}

BottleneckCache bottlenecks_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& header = doc.at("header");
    BottleneckCache cache;
    cache.fingerprint = header.at("fingerprint").get<std::string>();
    cache.length = header.at("length").get<std::size_t>();
    const auto count = header.at("count").get<std::size_t>();
    for (const auto& row : doc.at("rows")) {
      cache.ids.push_back(row.at("path").get<std::string>());
      cache.features.push_back(row.at("features").get<std::vector<double>>());
      if (cache.features.back().size() != cache.length) {
        throw DataError("bottleneck row '" + cache.ids.back() + "' has the wrong length");
      }
    }
    if (cache.size() != count) throw DataError("bottleneck cache row count disagrees with header");
    return cache;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed bottleneck cache: ") + e.what());
  }
}

void save_bottlenecks(const BottleneckCache& cache, const std::filesystem::path& path) {
  write_file_atomic(path, bottlenecks_to_json(cache));
}

BottleneckCache load_bottlenecks(const std::filesystem::path& path) {
  return bottlenecks_from_json(read_file(path));
}

CacheSource::CacheSource(const BottleneckCache& cache, std::span<const std::size_t> labels)
    : cache_(cache), labels_(labels) {
  if (labels.size() != cache.size()) throw DataError("one label per cached vector required");
}

Volume CacheSource::input(std::size_t i) const { return Volume::vector(cache_.features[i]); }

PrefixSource::PrefixSource(const Network& net, const Dataset& ds,
                           std::span<const std::size_t> labels)
    : net_(net), ds_(ds), labels_(labels) {
  net.require_head();
  if (labels.size() != ds.size()) throw DataError("one label per image required");
}

Volume PrefixSource::input(std::size_t i) const {
  return run_layers(net_, ds_[i].image.to_volume(), net_.require_head()).flattened();
}

HeadResult retrain_head(const ExampleSource& train, const ExampleSource& validation,
                        std::size_t length, std::size_t class_count, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  if (train.size() == 0) throw UsageError("cannot retrain a head on an empty cache");
  if (class_count == 0 || length == 0) throw UsageError("head dimensions must be >= 1");
  for (const ExampleSource* src : {&train, &validation}) {
    for (std::size_t i = 0; i < src->size(); ++i) {
      if (src->label(i) >= class_count) {
        throw DataError("label " + std::to_string(src->label(i)) + " out of range for " +
                        std::to_string(class_count) + " classes");
      }
    }
  }
  Network head(Shape{length, 1, 1}, {DenseParams(class_count, length), Softmax{}});
  initialize_parameters(head, config.seed);
  auto trained = train_full(std::move(head), train, validation, config, on_epoch);
  return HeadResult{std::get<DenseParams>(trained.net.layers()[0]), std::move(trained.log)};
}

HeadResult retrain_head(const BottleneckCache& train, std::span<const std::size_t> train_labels,
                        const BottleneckCache& validation,
                        std::span<const std::size_t> validation_labels, std::size_t class_count,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  if (train.size() == 0) throw UsageError("cannot retrain a head on an empty cache");
  if (validation.length != train.length || validation.fingerprint != train.fingerprint) {
    throw StaleCacheError("training and validation caches come from different extractors");
  }
  return retrain_head(CacheSource(train, train_labels), CacheSource(validation, validation_labels),
                      train.length, class_count, config, on_epoch);
}

Network attach_head(const Network& net, const DenseParams& head) {
  const std::size_t h = net.require_head();
  std::vector<Layer> layers(net.layers().begin(), net.layers().begin() + static_cast<long>(h));
  layers.emplace_back(head);
  layers.emplace_back(Softmax{});
  return Network(net.input_shape(), std::move(layers));
}

}  // namespace xfer
