#include "xfer/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xfer/error.hpp"

namespace xfer {

ConvParams::ConvParams(std::size_t out, std::size_t in, std::size_t h1, std::size_t h2)
    : out_channels(out), in_channels(in), half_height(h1), half_width(h2) {
  filters.assign(filter_count(), 0.0);
  biases.assign(out_channels, 0.0);
}

void ConvParams::validate() const {
  if (out_channels == 0 || in_channels == 0) {
    throw ShapeError("convolution needs at least one input and one output channel");
  }
  if (filters.size() != filter_count()) {
    throw ShapeError("convolution filter bank has " + std::to_string(filters.size()) +
                     " values, expected " + std::to_string(filter_count()));
  }
  if (biases.size() != out_channels) {
    throw ShapeError("convolution needs one bias per output channel");
  }
}

void PoolSpec::validate() const {
  if (extent == 0 || stride == 0) throw ShapeError("pool extent and stride must be >= 1");
}

Shape PoolSpec::output_shape(const Shape& in) const {
  validate();
  if (extent > in.height || extent > in.width) {
    throw ShapeError("pool extent " + std::to_string(extent) + " exceeds input " +
                     to_string(in));
  }
  return Shape{in.channels, (in.height - extent) / stride + 1, (in.width - extent) / stride + 1};
}

DenseParams::DenseParams(std::size_t out, std::size_t in) : out_units(out), in_units(in) {
  weights.assign(out * in, 0.0);
  biases.assign(out, 0.0);
}

void DenseParams::validate() const {
  if (out_units == 0 || in_units == 0) throw ShapeError("dense layer dimensions must be >= 1");
  if (weights.size() != out_units * in_units || biases.size() != out_units) {
    throw ShapeError("dense parameter arrays do not match " + std::to_string(out_units) + "x" +
                     std::to_string(in_units));
  }
}

Volume conv_forward(const Volume& input, const ConvParams& params) {
  params.validate();
  if (input.channels() != params.in_channels) {
    throw ShapeError("convolution expects " + std::to_string(params.in_channels) +
                     " input channels, got " + std::to_string(input.channels()));
  }
  require_finite(input.values(), "convolution input");

  const std::size_t H = input.height();
  const std::size_t W = input.width();
  const auto h1 = static_cast<std::ptrdiff_t>(params.half_height);
  const auto h2 = static_cast<std::ptrdiff_t>(params.half_width);
  const auto kh = static_cast<std::ptrdiff_t>(params.kernel_height());
  const auto kw = static_cast<std::ptrdiff_t>(params.kernel_width());
  const auto sH = static_cast<std::ptrdiff_t>(H);
  const auto sW = static_cast<std::ptrdiff_t>(W);

  Volume out(params.out_channels, H, W);
  for (std::size_t i = 0; i < params.out_channels; ++i) {
    double* dst = &out.at(i, 0, 0);
    std::fill(dst, dst + H * W, params.biases[i]);
    for (std::size_t j = 0; j < params.in_channels; ++j) {
      const double* src = &input.at(j, 0, 0);
      for (std::ptrdiff_t u = 0; u < kh; ++u) {
        const std::ptrdiff_t dy = u - h1;
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(sH, sH - dy);
        for (std::ptrdiff_t v = 0; v < kw; ++v) {
          const std::ptrdiff_t dx = v - h2;
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
          const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(sW, sW - dx);
          const double k = params.filter(i, j, static_cast<std::size_t>(u), static_cast<std::size_t>(v));
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            double* orow = dst + y * sW;
            const double* irow = src + (y + dy) * sW + dx;
            for (std::ptrdiff_t x = x0; x < x1; ++x) orow[x] += k * irow[x];
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv_backward(const Volume& input, const ConvParams& params, const Volume& grad_out) {
  const std::size_t H = input.height();
  const std::size_t W = input.width();
  if (input.channels() != params.in_channels ||
      grad_out.shape() != Shape{params.out_channels, H, W}) {
    throw ContractError("convolution backward: gradient shape does not match forward pass");
  }
  const auto h1 = static_cast<std::ptrdiff_t>(params.half_height);
  const auto h2 = static_cast<std::ptrdiff_t>(params.half_width);
  const auto kh = static_cast<std::ptrdiff_t>(params.kernel_height());
  const auto kw = static_cast<std::ptrdiff_t>(params.kernel_width());
  const auto sH = static_cast<std::ptrdiff_t>(H);
  const auto sW = static_cast<std::ptrdiff_t>(W);

  ConvGrads g{ConvParams(params.out_channels, params.in_channels, params.half_height,
                         params.half_width),
              Volume(input.shape())};
  for (std::size_t i = 0; i < params.out_channels; ++i) {
    const double* go = &grad_out.at(i, 0, 0);
    double bsum = 0.0;
    for (std::size_t n = 0; n < H * W; ++n) bsum += go[n];
    g.params.biases[i] = bsum;
    for (std::size_t j = 0; j < params.in_channels; ++j) {
      const double* src = &input.at(j, 0, 0);
      double* gin = &g.input.at(j, 0, 0);
      for (std::ptrdiff_t u = 0; u < kh; ++u) {
        const std::ptrdiff_t dy = u - h1;
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(sH, sH - dy);
        for (std::ptrdiff_t v = 0; v < kw; ++v) {
          const std::ptrdiff_t dx = v - h2;
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
          const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(sW, sW - dx);
          const auto uu = static_cast<std::size_t>(u);
          const auto vv = static_cast<std::size_t>(v);
          const double k = params.filter(i, j, uu, vv);
          double acc = 0.0;
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            const double* grow = go + y * sW;
            const double* irow = src + (y + dy) * sW + dx;
            double* girow = gin + (y + dy) * sW + dx;
            for (std::ptrdiff_t x = x0; x < x1; ++x) {
              acc += grow[x] * irow[x];
              girow[x] += grow[x] * k;
            }
          }
          g.params.filter(i, j, uu, vv) = acc;
        }
      }
    }
  }
  return g;
}

PoolResult pool_forward(const Volume& input, const PoolSpec& spec) {
  const Shape os = spec.output_shape(input.shape());
  require_finite(input.values(), "pool input");
  PoolResult r{Volume(os), std::vector<std::size_t>(os.size())};
  const std::size_t W = input.width();
  std::size_t k = 0;
  for (std::size_t c = 0; c < os.channels; ++c) {
    for (std::size_t oy = 0; oy < os.height; ++oy) {
      for (std::size_t ox = 0; ox < os.width; ++ox, ++k) {
        const std::size_t base = (c * input.height() + oy * spec.stride) * W + ox * spec.stride;
        std::size_t best = base;
        for (std::size_t u = 0; u < spec.extent; ++u) {
          for (std::size_t v = 0; v < spec.extent; ++v) {
            const std::size_t idx = base + u * W + v;
            if (input[idx] > input[best]) best = idx;
          }
        }
        r.output[k] = input[best];
        r.switches[k] = best;
      }
    }
  }
  return r;
}

Volume pool_backward(const Shape& input_shape, std::span<const std::size_t> switches,
                     const Volume& grad_out) {
  if (switches.size() != grad_out.size()) {
    throw ContractError("pool backward: switch count does not match gradient size");
  }
  Volume g(input_shape);
  for (std::size_t k = 0; k < switches.size(); ++k) {
    if (switches[k] >= g.size()) throw ContractError("pool backward: switch out of range");
    g[switches[k]] += grad_out[k];
  }
  return g;
}

std::vector<double> dense_forward(std::span<const double> input, const DenseParams& params) {
  params.validate();
  if (input.size() != params.in_units) {
    throw ShapeError("dense layer expects " + std::to_string(params.in_units) +
                     " inputs, got " + std::to_string(input.size()));
  }
  require_finite(input, "dense input");
  std::vector<double> out(params.out_units);
  for (std::size_t o = 0; o < params.out_units; ++o) {
    const double* w = &params.weights[o * params.in_units];
    double acc = params.biases[o];
    for (std::size_t i = 0; i < params.in_units; ++i) acc += w[i] * input[i];
    out[o] = acc;
  }
  return out;
}

DenseGrads dense_backward(std::span<const double> input, const DenseParams& params,
                          std::span<const double> grad_out) {
  if (input.size() != params.in_units || grad_out.size() != params.out_units) {
    throw ContractError("dense backward: gradient shape does not match forward pass");
  }
  DenseGrads g{DenseParams(params.out_units, params.in_units),
               std::vector<double>(params.in_units, 0.0)};
  for (std::size_t o = 0; o < params.out_units; ++o) {
    const double go = grad_out[o];
    g.params.biases[o] = go;
    const double* w = &params.weights[o * params.in_units];
    double* gw = &g.params.weights[o * params.in_units];
    for (std::size_t i = 0; i < params.in_units; ++i) {
      gw[i] = go * input[i];
      g.input[i] += go * w[i];
    }
  }
  return g;
}

std::vector<double> relu(std::span<const double> input) {
  std::vector<double> out(input.size());
  std::transform(input.begin(), input.end(), out.begin(),
                 [](double x) { return x > 0.0 ? x : 0.0; });
  return out;
}

Volume relu(const Volume& input) { return Volume(input.shape(), relu(input.values())); }

Volume relu_backward(const Volume& input, const Volume& grad_out) {
  if (input.shape() != grad_out.shape()) {
    throw ContractError("relu backward: gradient shape does not match forward pass");
  }
  Volume g(input.shape());
  for (std::size_t n = 0; n < input.size(); ++n) g[n] = input[n] > 0.0 ? grad_out[n] : 0.0;
  return g;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  require_finite(logits, "softmax input");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace xfer
