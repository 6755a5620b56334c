#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xfer/volume.hpp"

namespace xfer {

/// Filter bank of a "same" convolution. Filters are (2*half_height+1) x
/// (2*half_width+1), stored row-major as [out][in][u][v].
struct ConvParams {
  std::size_t out_channels = 1;
  std::size_t in_channels = 1;
  std::size_t half_height = 0;
  std::size_t half_width = 0;
  std::vector<double> filters;
  std::vector<double> biases;

  ConvParams() = default;
  /// Zero-initialized bank.
  ConvParams(std::size_t out, std::size_t in, std::size_t h1, std::size_t h2);

  std::size_t kernel_height() const { return 2 * half_height + 1; }
  std::size_t kernel_width() const { return 2 * half_width + 1; }
  std::size_t filter_count() const {
    return out_channels * in_channels * kernel_height() * kernel_width();
  }
  double& filter(std::size_t i, std::size_t j, std::size_t u, std::size_t v) {
    return filters[((i * in_channels + j) * kernel_height() + u) * kernel_width() + v];
  }
  double filter(std::size_t i, std::size_t j, std::size_t u, std::size_t v) const {
    return filters[((i * in_channels + j) * kernel_height() + u) * kernel_width() + v];
  }

  /// Throws ShapeError if the arrays disagree with the declared dimensions.
  void validate() const;
  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

enum class PoolKind { max };

struct PoolSpec {
  std::size_t extent = 2;
  std::size_t stride = 2;
  PoolKind kind = PoolKind::max;

  void validate() const;
  /// floor((in - F) / S) + 1 per spatial dim; throws ShapeError if F > in.
  Shape output_shape(const Shape& in) const;
  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

/// Affine map weights * x + biases; weights are out_units x in_units row-major.
struct DenseParams {
  std::size_t out_units = 1;
  std::size_t in_units = 1;
  std::vector<double> weights;
  std::vector<double> biases;

  DenseParams() = default;
  DenseParams(std::size_t out, std::size_t in);

  double& weight(std::size_t o, std::size_t i) { return weights[o * in_units + i]; }
  double weight(std::size_t o, std::size_t i) const { return weights[o * in_units + i]; }

  void validate() const;
  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

/// Result of max pooling: the pooled volume plus, for every output element,
/// the flat input index that won the window.
struct PoolResult {
  Volume output;
  std::vector<std::size_t> switches;
};

Volume conv_forward(const Volume& input, const ConvParams& params);
PoolResult pool_forward(const Volume& input, const PoolSpec& spec);
std::vector<double> dense_forward(std::span<const double> input, const DenseParams& params);
Volume relu(const Volume& input);
std::vector<double> relu(std::span<const double> input);
/// Max-shifted softmax. Throws ShapeError on empty input.
std::vector<double> softmax(std::span<const double> logits);

// Backward passes. Each takes the layer input seen on the forward pass and
// the loss gradient w.r.t. the layer output.

struct ConvGrads {
  ConvParams params;  // same layout as the forward params
  Volume input;
};
ConvGrads conv_backward(const Volume& input, const ConvParams& params, const Volume& grad_out);

Volume pool_backward(const Shape& input_shape, std::span<const std::size_t> switches,
                     const Volume& grad_out);

struct DenseGrads {
  DenseParams params;
  std::vector<double> input;
};
DenseGrads dense_backward(std::span<const double> input, const DenseParams& params,
                          std::span<const double> grad_out);

Volume relu_backward(const Volume& input, const Volume& grad_out);

}  // namespace xfer
