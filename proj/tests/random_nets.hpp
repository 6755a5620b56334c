#pragma once

// Small randomized networks for gradient and property tests.

#include <vector>

#include "oracles.hpp"
#include "xfer/network.hpp"
#include "xfer/rng.hpp"

namespace testnets {

enum class Focus { conv, pool, dense, softmax, full };

inline void randomize(xfer::Network& net, xfer::Rng& rng, double scale = 0.5) {
  for (auto block : net.parameter_blocks()) {
    for (double& v : block) v = rng.uniform(-scale, scale);
  }
}

struct Instance {
  xfer::Network net;
  xfer::Volume input;
  std::size_t label;
};

/// One random instance exercising the given layer kind.
inline Instance make_instance(Focus focus, xfer::Rng& rng) {
  using namespace xfer;
  const auto pick = [&](long lo, long hi) { return static_cast<std::size_t>(rng.uniform_int(lo, hi)); };
  const std::size_t classes = pick(2, 5);
  std::vector<Layer> layers;
  Shape in;
  switch (focus) {
    case Focus::conv: {
      in = Shape{pick(1, 3), pick(3, 6), pick(3, 6)};
      const std::size_t out = pick(1, 3);
      layers = {ConvParams(out, in.channels, pick(0, 1), pick(0, 1)), Flatten{},
                DenseParams(classes, out * in.height * in.width), Softmax{}};
      break;
    }
    case Focus::pool: {
      in = Shape{pick(1, 3), pick(2, 7), pick(2, 7)};
      const std::size_t f = pick(1, static_cast<long>(std::min(in.height, in.width)));
      const PoolSpec spec{f, pick(1, 3), PoolKind::max};
      const Shape os = spec.output_shape(in);
      layers = {spec, Flatten{}, DenseParams(classes, os.size()), Softmax{}};
      break;
    }
    case Focus::dense: {
      const std::size_t n = pick(1, 8);
      const std::size_t hidden = pick(1, 6);
      in = Shape{n, 1, 1};
      layers = {DenseParams(hidden, n), Relu{}, DenseParams(classes, hidden), Softmax{}};
      break;
    }
    case Focus::softmax: {
      in = Shape{classes, 1, 1};
      layers = {Softmax{}};
      break;
    }
    case Focus::full: {
      in = Shape{pick(1, 2), pick(4, 6), pick(4, 6)};
      const std::size_t ch = pick(1, 3);
      const PoolSpec spec{2, 2, PoolKind::max};
      const Shape os = spec.output_shape(Shape{ch, in.height, in.width});
      layers = {ConvParams(ch, in.channels, 1, 1), Relu{}, spec, Flatten{},
                DenseParams(classes, os.size()), Softmax{}};
      break;
    }
  }
  Network net(in, std::move(layers));
  randomize(net, rng);
  const double span = focus == Focus::softmax ? 3.0 : 1.0;
  return Instance{std::move(net), oracle::random_volume(rng, in, -span, span),
                  pick(0, static_cast<long>(classes) - 1)};
}

}  // namespace testnets
