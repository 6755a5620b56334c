#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xfer/layers.hpp"
#include "xfer/volume.hpp"

namespace xfer {

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};
struct Flatten {
  friend bool operator==(const Flatten&, const Flatten&) = default;
};
struct Softmax {
  friend bool operator==(const Softmax&, const Softmax&) = default;
};

using Layer = std::variant<ConvParams, PoolSpec, Relu, Flatten, DenseParams, Softmax>;

/// Short lowercase name of a layer kind ("conv", "pool", ...).
const char* layer_kind(const Layer& layer);

/// Ordered stack of layers with a fixed input shape. Construction checks
/// that every adjacent pair of layers is shape-compatible, that the stack
/// ends in its only Softmax, and locates the head: the final Dense layer.
/// Everything before the head is the feature extractor.
class Network {
 public:
  Network(Shape input, std::vector<Layer> layers);

  const Shape& input_shape() const { return input_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  /// Output shape of layer i.
  const Shape& output_shape(std::size_t i) const { return shapes_.at(i); }
  /// Shape fed into layer i.
  const Shape& input_shape_of(std::size_t i) const { return i == 0 ? input_ : shapes_.at(i - 1); }
  std::size_t class_count() const { return shapes_.back().size(); }

  /// Index of the final Dense layer, if the network has one.
  std::optional<std::size_t> head_index() const { return head_; }
  /// Head index or ContractError when the network has no Dense layer.
  std::size_t require_head() const;

  /// Mutable views of every trainable array, in layer order; for each
  /// layer the weights/filters come before the biases.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  /// Same, restricted to layers [begin, end).
  std::vector<std::span<const double>> parameter_blocks(std::size_t begin, std::size_t end) const;
  std::size_t parameter_count() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  Shape input_;
  std::vector<Layer> layers_;
  std::vector<Shape> shapes_;
  std::optional<std::size_t> head_;
};

/// Everything the backward pass needs from a forward pass: the input each
/// layer saw and, for pool layers, the argmax switches.
struct ActivationCache {
  std::vector<std::string> kinds;
  std::vector<Volume> inputs;
  std::vector<std::vector<std::size_t>> switches;
  std::vector<double> probabilities;
};

struct ForwardResult {
  std::vector<double> probabilities;
  ActivationCache cache;
};

/// Loss gradients for every parameter block (same order as
/// Network::parameter_blocks) and for the network input.
struct Gradients {
  std::vector<std::vector<double>> blocks;
  Volume input;

  /// Elementwise accumulate `other` into this.
  void add(const Gradients& other);
  void scale(double factor);
};

ForwardResult forward(const Network& net, const Volume& input);
/// Forward pass without keeping activations.
std::vector<double> predict(const Network& net, const Volume& input);
/// Output of layers [0, end). `end == 0` returns the input unchanged.
Volume run_layers(const Network& net, const Volume& input, std::size_t end);

/// Cross-entropy gradients for a one-hot `target`. At the logits the
/// softmax and loss combine to (p - t).
Gradients backward(const Network& net, const ActivationCache& cache,
                   std::span<const double> target);

/// Worst relative error |a - n| / max(|a|, |n|, 1e-12) between analytic
/// parameter gradients and central differences with step `eps`.
double grad_check(const Network& net, const Volume& input, std::span<const double> target,
                  double eps);
/// Same comparison for the gradient with respect to the input volume.
double grad_check_input(const Network& net, const Volume& input, std::span<const double> target,
                        double eps);

double relative_error(double analytic, double numeric);

/// One-hot vector of length `classes` with a 1 at `label`.
std::vector<double> one_hot(std::size_t label, std::size_t classes);

}  // namespace xfer
