#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "xfer/curves.hpp"
#include "xfer/dataset.hpp"
#include "xfer/network.hpp"

namespace xfer {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;

  /// Throws UsageError on a non-positive rate, zero epochs or batch size,
  /// or a validation fraction outside (0, 1).
  void validate() const;
};

struct Example {
  Volume input;
  std::size_t label = 0;
};

/// Random-access training data. Implementations must return the same
/// value for the same index every time.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual Volume input(std::size_t i) const = 0;
  virtual std::size_t label(std::size_t i) const = 0;
};

class ExampleSpan final : public ExampleSource {
 public:
  explicit ExampleSpan(std::span<const Example> examples) : examples_(examples) {}
  std::size_t size() const override { return examples_.size(); }
  Volume input(std::size_t i) const override { return examples_[i].input; }
  std::size_t label(std::size_t i) const override { return examples_[i].label; }

 private:
  std::span<const Example> examples_;
};

/// One example per dataset item, image as a 3 x H x W volume.
std::vector<Example> examples_from(const Dataset& ds);

/// theta <- theta - lr * g, elementwise. Throws ContractError on a size mismatch.
void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate);
void sgd_step(Network& net, const Gradients& grads, double learning_rate);

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
void initialize_parameters(Network& net, std::uint64_t seed);

/// Layout of the small CNN used for the shapes pipeline:
/// [conv 3x3, relu, maxpool 2/2] per conv stage, flatten, dense(hidden),
/// relu, dense(classes), softmax.
struct CnnSpec {
  Shape input{3, 32, 32};
  std::vector<std::size_t> conv_channels{8, 16};
  std::size_t hidden = 32;
  std::size_t classes = 5;
};
Network make_cnn(const CnnSpec& spec, std::uint64_t seed);

struct SplitScore {
  double accuracy = 0.0;
  double cross_entropy = 0.0;
  /// (actual, predicted) per example, in source order.
  std::vector<std::pair<std::size_t, std::size_t>> predictions;
};

/// Accuracy of argmax predictions and mean cross-entropy. Throws UsageError
/// on an empty split.
SplitScore evaluate_split(const Network& net, const ExampleSource& split);

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord&)>;

struct TrainResult {
  Network net;
  EpochLog log;
};

/// Mini-batch SGD over every parameter. Each epoch visits the training set
/// in an order shuffled with seed ^ epoch, averages gradients per batch,
/// then scores both splits into the log.
TrainResult train_full(Network net, const ExampleSource& train, const ExampleSource& validation,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace xfer
