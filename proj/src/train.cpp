#include "xfer/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xfer/error.hpp"
#include "xfer/loss.hpp"
#include "xfer/rng.hpp"

namespace xfer {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be positive");
  }
  if (epochs == 0) throw UsageError("epochs must be >= 1");
  if (batch_size == 0) throw UsageError("batch size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw UsageError("validation fraction must lie in (0, 1)");
  }
}

std::vector<Example> examples_from(const Dataset& ds) {
  std::vector<Example> out;
  out.reserve(ds.size());
  for (const auto& item : ds.items()) out.push_back(Example{item.image.to_volume(), item.label});
  return out;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate) {
  if (params.size() != grads.size()) {
    throw ContractError("sgd_step: " + std::to_string(grads.size()) + " gradients for " +
                        std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grads[i];
}

void sgd_step(Network& net, const Gradients& grads, double learning_rate) {
  auto blocks = net.parameter_blocks();
  if (blocks.size() != grads.blocks.size()) {
    throw ContractError("sgd_step: gradient blocks do not match the network");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) sgd_step(blocks[b], grads.blocks[b], learning_rate);
}

void initialize_parameters(Network& net, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Layer> layers = net.layers();
  for (auto& layer : layers) {
    if (auto* c = std::get_if<ConvParams>(&layer)) {
      const auto area = static_cast<double>(c->kernel_height() * c->kernel_width());
      const double limit =
          std::sqrt(6.0 / (area * static_cast<double>(c->in_channels + c->out_channels)));
      for (double& w : c->filters) w = rng.uniform(-limit, limit);
      std::fill(c->biases.begin(), c->biases.end(), 0.0);
    } else if (auto* d = std::get_if<DenseParams>(&layer)) {
      const double limit = std::sqrt(6.0 / static_cast<double>(d->in_units + d->out_units));
      for (double& w : d->weights) w = rng.uniform(-limit, limit);
      std::fill(d->biases.begin(), d->biases.end(), 0.0);
    }
  }
  net = Network(net.input_shape(), std::move(layers));
}

Network make_cnn(const CnnSpec& spec, std::uint64_t seed) {
  std::vector<Layer> layers;
  Shape cur = spec.input;
  for (std::size_t out : spec.conv_channels) {
    layers.emplace_back(ConvParams(out, cur.channels, 1, 1));
    layers.emplace_back(Relu{});
    const PoolSpec pool{2, 2, PoolKind::max};
    layers.emplace_back(pool);
    cur = pool.output_shape(Shape{out, cur.height, cur.width});
  }
  layers.emplace_back(Flatten{});
  layers.emplace_back(DenseParams(spec.hidden, cur.size()));
  layers.emplace_back(Relu{});
  layers.emplace_back(DenseParams(spec.classes, spec.hidden));
  layers.emplace_back(Softmax{});
  Network net(spec.input, std::move(layers));
  initialize_parameters(net, seed);
  return net;
}

SplitScore evaluate_split(const Network& net, const ExampleSource& split) {
  if (split.size() == 0) throw UsageError("cannot evaluate an empty split");
  SplitScore s;
  s.predictions.reserve(split.size());
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto p = predict(net, split.input(i));
    const std::size_t label = split.label(i);
    const auto predicted =
        static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (predicted == label) ++correct;
    loss += cross_entropy(p, one_hot(label, p.size()));
    s.predictions.emplace_back(label, predicted);
  }
  const auto n = static_cast<double>(split.size());
  s.accuracy = static_cast<double>(correct) / n;
  s.cross_entropy = loss / n;
  return s;
}

TrainResult train_full(Network net, const ExampleSource& train, const ExampleSource& validation,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0) {
    throw UsageError("training and validation splits must both be non-empty");
  }
  const std::size_t classes = net.class_count();
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.label(i) >= classes) {
      throw DataError("training label " + std::to_string(train.label(i)) + " out of range for " +
                      std::to_string(classes) + " classes");
    }
  }

  TrainResult result{std::move(net), {}};
  Network& model = result.net;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed ^ static_cast<std::uint64_t>(epoch));
    rng.shuffle(std::span(order));

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Gradients sum;
      for (std::size_t n = start; n < end; ++n) {
        const std::size_t i = order[n];
        const auto fwd = forward(model, train.input(i));
        auto g = backward(model, fwd.cache, one_hot(train.label(i), classes));
        if (n == start) {
          sum = std::move(g);
        } else {
          sum.add(g);
        }
      }
      sum.scale(1.0 / static_cast<double>(end - start));
      for (const auto& block : sum.blocks) require_finite(block, "parameter gradients");
      sgd_step(model, sum, config.learning_rate);
    }

    const SplitScore tr = evaluate_split(model, train);
    const SplitScore va = evaluate_split(model, validation);
    EpochRecord rec{tr.accuracy, va.accuracy, tr.cross_entropy, va.cross_entropy};
    if (!std::isfinite(rec.train_cross_entropy) || !std::isfinite(rec.validation_cross_entropy)) {
      throw NumericError("cross-entropy diverged at epoch " + std::to_string(epoch + 1));
    }
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(epoch + 1, rec);
  }
  return result;
}

}  // namespace xfer
