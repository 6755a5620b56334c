#include "xfer/network.hpp"

#include <algorithm>
#include <cmath>

#include "xfer/error.hpp"
#include "xfer/loss.hpp"

namespace xfer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string at_layer(std::size_t i, const Layer& l) {
  return "layer " + std::to_string(i) + " (" + layer_kind(l) + "): ";
}

Shape infer_output(const Layer& layer, const Shape& in) {
  return std::visit(
      overloaded{
          [&](const ConvParams& p) {
            p.validate();
            if (in.channels != p.in_channels) {
              throw ShapeError("expects " + std::to_string(p.in_channels) +
                               " input channels, got " + to_string(in));
            }
            return Shape{p.out_channels, in.height, in.width};
          },
          [&](const PoolSpec& s) { return s.output_shape(in); },
          [&](const Relu&) { return in; },
          [&](const Flatten&) { return Shape{in.size(), 1, 1}; },
          [&](const DenseParams& p) {
            p.validate();
            if (!in.flat() || in.channels != p.in_units) {
              throw ShapeError("expects a flat vector of " + std::to_string(p.in_units) +
                               " values, got " + to_string(in));
            }
            return Shape{p.out_units, 1, 1};
          },
          [&](const Softmax&) {
            if (!in.flat()) throw ShapeError("expects a flat vector, got " + to_string(in));
            return in;
          },
      },
      layer);
}

void check_cache(const Network& net, const ActivationCache& cache) {
  if (cache.kinds.size() != net.size() || cache.inputs.size() != net.size() ||
      cache.switches.size() != net.size()) {
    throw ContractError("activation cache has " + std::to_string(cache.kinds.size()) +
                        " layers, network has " + std::to_string(net.size()));
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (cache.kinds[i] != layer_kind(net.layers()[i]) ||
        cache.inputs[i].shape() != net.input_shape_of(i)) {
      throw ContractError("activation cache does not match network at layer " + std::to_string(i));
    }
  }
  if (cache.probabilities.size() != net.class_count()) {
    throw ContractError("activation cache has no matching output");
  }
}

}  // namespace

const char* layer_kind(const Layer& layer) {
  return std::visit(overloaded{
                        [](const ConvParams&) { return "conv"; },
                        [](const PoolSpec&) { return "pool"; },
                        [](const Relu&) { return "relu"; },
                        [](const Flatten&) { return "flatten"; },
                        [](const DenseParams&) { return "dense"; },
                        [](const Softmax&) { return "softmax"; },
                    },
                    layer);
}

Network::Network(Shape input, std::vector<Layer> layers)
    : input_(input), layers_(std::move(layers)) {
  if (input_.channels == 0 || input_.height == 0 || input_.width == 0) {
    throw ShapeError("network input dimensions must be >= 1");
  }
  if (layers_.empty()) throw ShapeError("network has no layers");
  Shape cur = input_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool is_softmax = std::holds_alternative<Softmax>(layers_[i]);
    if (is_softmax != (i + 1 == layers_.size())) {
      throw ShapeError(at_layer(i, layers_[i]) +
                       "a network has exactly one softmax and it must be the last layer");
    }
    try {
      cur = infer_output(layers_[i], cur);
    } catch (const ShapeError& e) {
      throw ShapeError(at_layer(i, layers_[i]) + e.what());
    }
    shapes_.push_back(cur);
    if (std::holds_alternative<DenseParams>(layers_[i])) head_ = i;
  }
}

std::size_t Network::require_head() const {
  if (!head_) throw ContractError("network has no dense head layer");
  return *head_;
}

std::vector<std::span<double>> Network::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    if (auto* c = std::get_if<ConvParams>(&l)) {
      out.emplace_back(c->filters);
      out.emplace_back(c->biases);
    } else if (auto* d = std::get_if<DenseParams>(&l)) {
      out.emplace_back(d->weights);
      out.emplace_back(d->biases);
    }
  }
  return out;
}

std::vector<std::span<const double>> Network::parameter_blocks(std::size_t begin,
                                                               std::size_t end) const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = begin; i < std::min(end, layers_.size()); ++i) {
    const auto& l = layers_[i];
    if (const auto* c = std::get_if<ConvParams>(&l)) {
      out.emplace_back(c->filters);
      out.emplace_back(c->biases);
    } else if (const auto* d = std::get_if<DenseParams>(&l)) {
      out.emplace_back(d->weights);
      out.emplace_back(d->biases);
    }
  }
  return out;
}

std::vector<std::span<const double>> Network::parameter_blocks() const {
  return parameter_blocks(0, layers_.size());
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : parameter_blocks()) n += b.size();
  return n;
}

void Gradients::add(const Gradients& other) {
  if (blocks.size() != other.blocks.size() || input.shape() != other.input.shape()) {
    throw ContractError("cannot add gradients of different networks");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size() != other.blocks[b].size()) {
      throw ContractError("cannot add gradients of different networks");
    }
    for (std::size_t n = 0; n < blocks[b].size(); ++n) blocks[b][n] += other.blocks[b][n];
  }
  for (std::size_t n = 0; n < input.size(); ++n) input[n] += other.input[n];
}

void Gradients::scale(double factor) {
  for (auto& b : blocks) {
    for (double& v : b) v *= factor;
  }
  for (double& v : input.values()) v *= factor;
}

namespace {

// Applies layer i to `x`; records pool switches when `switches` is non-null.
Volume apply_layer(const Network& net, std::size_t i, const Volume& x,
                   std::vector<std::size_t>* switches) {
  const Layer& layer = net.layers()[i];
  if (x.shape() != net.input_shape_of(i)) {
    throw ShapeError(at_layer(i, layer) + "input " + to_string(x.shape()) + " does not match " +
                     to_string(net.input_shape_of(i)));
  }
  return std::visit(overloaded{
                        [&](const ConvParams& p) { return conv_forward(x, p); },
                        [&](const PoolSpec& s) {
                          auto r = pool_forward(x, s);
                          if (switches) *switches = std::move(r.switches);
                          return std::move(r.output);
                        },
                        [&](const Relu&) { return relu(x); },
                        [&](const Flatten&) { return x.flattened(); },
                        [&](const DenseParams& p) {
                          return Volume::vector(dense_forward(x.values(), p));
                        },
                        [&](const Softmax&) { return Volume::vector(softmax(x.values())); },
                    },
                    layer);
}

}  // namespace

ForwardResult forward(const Network& net, const Volume& input) {
  ForwardResult r;
  auto& c = r.cache;
  c.kinds.reserve(net.size());
  c.inputs.reserve(net.size());
  c.switches.resize(net.size());
  Volume x = input;
  for (std::size_t i = 0; i < net.size(); ++i) {
    c.kinds.emplace_back(layer_kind(net.layers()[i]));
    Volume y = apply_layer(net, i, x, &c.switches[i]);
    c.inputs.push_back(std::move(x));
    x = std::move(y);
  }
  c.probabilities = x.data();
  r.probabilities = x.data();
  return r;
}

std::vector<double> predict(const Network& net, const Volume& input) {
  return run_layers(net, input, net.size()).data();
}

Volume run_layers(const Network& net, const Volume& input, std::size_t end) {
  if (end > net.size()) throw ContractError("run_layers past the end of the network");
  if (end == 0 && input.shape() != net.input_shape()) {
    throw ShapeError("input " + to_string(input.shape()) + " does not match network input " +
                     to_string(net.input_shape()));
  }
  Volume x = input;
  for (std::size_t i = 0; i < end; ++i) x = apply_layer(net, i, x, nullptr);
  return x;
}

std::vector<double> one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw DataError("label " + std::to_string(label) + " out of range for " +
                    std::to_string(classes) + " classes");
  }
  std::vector<double> t(classes, 0.0);
  t[label] = 1.0;
  return t;
}

Gradients backward(const Network& net, const ActivationCache& cache,
                   std::span<const double> target) {
  check_cache(net, cache);
  if (target.size() != net.class_count()) {
    throw ShapeError("target has " + std::to_string(target.size()) + " entries, network has " +
                     std::to_string(net.class_count()) + " classes");
  }
  std::size_t ones = 0;
  for (double t : target) {
    if (t == 1.0) {
      ++ones;
    } else if (t != 0.0) {
      ones = 2;
    }
  }
  if (ones != 1) throw DataError("target is not a one-hot vector");

  // Parameter blocks are emitted back to front, then reversed.
  std::vector<std::vector<double>> rev;
  const std::size_t last = net.size() - 1;
  std::vector<double> g0(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) g0[k] = cache.probabilities[k] - target[k];
  Volume grad = Volume::vector(std::move(g0));

  for (std::size_t n = last; n-- > 0;) {
    const Volume& x = cache.inputs[n];
    std::visit(overloaded{
                   [&](const ConvParams& p) {
                     auto g = conv_backward(x, p, grad);
                     rev.push_back(std::move(g.params.biases));
                     rev.push_back(std::move(g.params.filters));
                     grad = std::move(g.input);
                   },
                   [&](const PoolSpec&) { grad = pool_backward(x.shape(), cache.switches[n], grad); },
                   [&](const Relu&) { grad = relu_backward(x, grad); },
                   [&](const Flatten&) { grad = grad.reshaped(x.shape()); },
                   [&](const DenseParams& p) {
                     auto g = dense_backward(x.values(), p, grad.values());
                     rev.push_back(std::move(g.params.biases));
                     rev.push_back(std::move(g.params.weights));
                     grad = Volume::vector(std::move(g.input));
                   },
                   [&](const Softmax&) {},
               },
               net.layers()[n]);
  }
  std::reverse(rev.begin(), rev.end());
  return Gradients{std::move(rev), std::move(grad)};
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double loss_at(const Network& net, const Volume& input, std::span<const double> target) {
  return cross_entropy(predict(net, input), target);
}

}  // namespace

double grad_check(const Network& net, const Volume& input, std::span<const double> target,
                  double eps) {
  if (!(eps > 0.0)) throw UsageError("grad_check step must be positive");
  const auto analytic = backward(net, forward(net, input).cache, target);
  Network probe = net;
  auto blocks = probe.parameter_blocks();
  double worst = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t n = 0; n < blocks[b].size(); ++n) {
      const double saved = blocks[b][n];
      blocks[b][n] = saved + eps;
      const double up = loss_at(probe, input, target);
      blocks[b][n] = saved - eps;
      const double down = loss_at(probe, input, target);
      blocks[b][n] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(analytic.blocks[b][n], numeric));
    }
  }
  return worst;
}

double grad_check_input(const Network& net, const Volume& input, std::span<const double> target,
                        double eps) {
  if (!(eps > 0.0)) throw UsageError("grad_check step must be positive");
  const auto analytic = backward(net, forward(net, input).cache, target);
  Volume probe = input;
  double worst = 0.0;
  for (std::size_t n = 0; n < probe.size(); ++n) {
    const double saved = probe[n];
    probe[n] = saved + eps;
    const double up = loss_at(net, probe, target);
    probe[n] = saved - eps;
    const double down = loss_at(net, probe, target);
    probe[n] = saved;
    worst = std::max(worst, relative_error(analytic.input[n], (up - down) / (2.0 * eps)));
  }
  return worst;
}

}  // namespace xfer
