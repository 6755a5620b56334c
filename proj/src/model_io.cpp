#include "xfer/model_io.hpp"

#include <json.hpp>

#include "xfer/error.hpp"
#include "xfer/io.hpp"

namespace xfer {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "xfer-model";

json shape_json(const Shape& s) {
  return json{{"channels", s.channels}, {"height", s.height}, {"width", s.width}};
}

Shape shape_from(const json& j) {
  return Shape{j.at("channels").get<std::size_t>(), j.at("height").get<std::size_t>(),
               j.at("width").get<std::size_t>()};
}

json layer_json(const Layer& layer, const Shape& in, const Shape& out) {
  json j{{"type", layer_kind(layer)}, {"input", shape_json(in)}, {"output", shape_json(out)}};
  if (const auto* c = std::get_if<ConvParams>(&layer)) {
    j["out_channels"] = c->out_channels;
    j["in_channels"] = c->in_channels;
    j["half_height"] = c->half_height;
    j["half_width"] = c->half_width;
    j["filters"] = c->filters;
    j["biases"] = c->biases;
  } else if (const auto* p = std::get_if<PoolSpec>(&layer)) {
    j["kind"] = "max";
    j["extent"] = p->extent;
    j["stride"] = p->stride;
  } else if (const auto* d = std::get_if<DenseParams>(&layer)) {
    j["out_units"] = d->out_units;
    j["in_units"] = d->in_units;
    j["weights"] = d->weights;
    j["biases"] = d->biases;
  }
  return j;
}

Layer layer_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "conv") {
    ConvParams c;
    c.out_channels = j.at("out_channels").get<std::size_t>();
    c.in_channels = j.at("in_channels").get<std::size_t>();
    c.half_height = j.at("half_height").get<std::size_t>();
    c.half_width = j.at("half_width").get<std::size_t>();
    c.filters = j.at("filters").get<std::vector<double>>();
    c.biases = j.at("biases").get<std::vector<double>>();
    return c;
  }
  if (type == "pool") {
    if (j.at("kind").get<std::string>() != "max") throw DataError("unsupported pool kind");
    return PoolSpec{j.at("extent").get<std::size_t>(), j.at("stride").get<std::size_t>(),
                    PoolKind::max};
  }
  if (type == "relu") return Relu{};
  if (type == "flatten") return Flatten{};
  if (type == "dense") {
    DenseParams d;
    d.out_units = j.at("out_units").get<std::size_t>();
    d.in_units = j.at("in_units").get<std::size_t>();
    d.weights = j.at("weights").get<std::vector<double>>();
    d.biases = j.at("biases").get<std::vector<double>>();
    return d;
  }
  if (type == "softmax") return Softmax{};
  throw DataError("unknown layer type '" + type + "'");
}

}  // namespace

std::string model_to_json(const Network& net) {
  json layers = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    layers.push_back(layer_json(net.layers()[i], net.input_shape_of(i), net.output_shape(i)));
  }
  json doc{{"format", kFormat},
           {"version", kModelFormatVersion},
           {"input", shape_json(net.input_shape())},
           {"head_index", net.head_index() ? json(*net.head_index()) : json(nullptr)},
           {"layers", std::move(layers)}};
  return doc.dump(1) + "\n";
}

Network model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) throw DataError("not an xfer model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model version " + std::to_string(version));
    }
    std::vector<Layer> layers;
    for (const auto& l : doc.at("layers")) layers.push_back(layer_from(l));
    Network net(shape_from(doc.at("input")), std::move(layers));
    // Recorded shapes must agree with what the layers imply.
    const auto& jl = doc.at("layers");
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (jl[i].contains("output") && shape_from(jl[i]["output"]) != net.output_shape(i)) {
        throw ShapeError("layer " + std::to_string(i) + " recorded output shape disagrees");
      }
    }
    return net;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
}

void save_model(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(net));
}

Network load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

}  // namespace xfer
