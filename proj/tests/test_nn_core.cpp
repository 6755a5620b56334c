#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "random_nets.hpp"
#include "xfer/error.hpp"
#include "xfer/layers.hpp"
#include "xfer/loss.hpp"
#include "xfer/network.hpp"

using namespace xfer;

namespace {

Volume grid3x3() { return Volume(Shape{1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}); }

ConvParams unit_kernel(std::size_t channels) {
  ConvParams p(channels, channels, 0, 0);
  for (std::size_t c = 0; c < channels; ++c) p.filter(c, c, 0, 0) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("conv_forward: identity kernel") {
  const Volume ones(1, 3, 3, 1.0);
  CHECK(conv_forward(ones, unit_kernel(1)) == ones);
}

TEST_CASE("conv_forward: 3x3 box filter with zero padding") {
  ConvParams box(1, 1, 1, 1);
  std::fill(box.filters.begin(), box.filters.end(), 1.0);
  const Volume in = grid3x3();
  const Volume out = conv_forward(in, box);
  const Volume ref = oracle::naive_conv(in, box);
  CHECK(ref.at(0, 1, 1) == 45.0);
  CHECK(ref.at(0, 0, 0) == 12.0);
  CHECK(out == ref);
}

TEST_CASE("conv_forward: output channels follow the filter bank") {
  Rng rng(3);
  const Volume in = oracle::random_volume(rng, Shape{3, 8, 8});
  ConvParams p(5, 3, 1, 1);
  for (double& w : p.filters) w = rng.uniform(-1, 1);
  const Volume out = conv_forward(in, p);
  CHECK(out.shape() == Shape{5, 8, 8});
  const Volume ref = oracle::naive_conv(in, p);
  for (std::size_t n = 0; n < out.size(); ++n) CHECK(out[n] == doctest::Approx(ref[n]).epsilon(1e-12));
}

TEST_CASE("conv_forward: errors") {
  CHECK_THROWS_AS(conv_forward(Volume(2, 3, 3), unit_kernel(1)), ShapeError);
  Volume bad(1, 3, 3);
  bad[4] = std::nan("");
  CHECK_THROWS_AS(conv_forward(bad, unit_kernel(1)), NumericError);
}

TEST_CASE("conv_forward: linear in the input when bias is zero") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{2, 5, 4};
    ConvParams p(3, 2, 1, 1);
    for (double& w : p.filters) w = rng.uniform(-1, 1);
    const Volume x = oracle::random_volume(rng, s);
    const Volume y = oracle::random_volume(rng, s);
    const double a = rng.uniform(-2, 2);
    const double b = rng.uniform(-2, 2);
    Volume mix(s);
    for (std::size_t n = 0; n < mix.size(); ++n) mix[n] = a * x[n] + b * y[n];
    const Volume lhs = conv_forward(mix, p);
    const Volume cx = conv_forward(x, p);
    const Volume cy = conv_forward(y, p);
    for (std::size_t n = 0; n < lhs.size(); ++n) {
      CHECK(std::abs(lhs[n] - (a * cx[n] + b * cy[n])) < 1e-10);
    }
  }
}

TEST_CASE("conv_forward: unit kernel is the identity on random volumes") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{static_cast<std::size_t>(rng.uniform_int(1, 4)),
                  static_cast<std::size_t>(rng.uniform_int(1, 9)),
                  static_cast<std::size_t>(rng.uniform_int(1, 9))};
    const Volume v = oracle::random_volume(rng, s, -5, 5);
    CHECK(conv_forward(v, unit_kernel(s.channels)) == v);
  }
}

TEST_CASE("pool_forward: shapes and values") {
  const Volume big(3, 32, 32);
  CHECK(pool_forward(big, PoolSpec{2, 2}).output.shape() == Shape{3, 16, 16});

  const auto r = pool_forward(Volume(Shape{1, 2, 2}, {1, 2, 3, 4}), PoolSpec{2, 2});
  CHECK(r.output.shape() == Shape{1, 1, 1});
  CHECK(r.output[0] == 4.0);
  CHECK(r.switches == std::vector<std::size_t>{3});

  const Volume one(Shape{1, 1, 1}, {7.5});
  CHECK(pool_forward(one, PoolSpec{1, 1}).output == one);

  CHECK_THROWS_AS(pool_forward(Volume(1, 2, 5), PoolSpec{3, 1}), ShapeError);
}

TEST_CASE("pool_forward: shape law over random (in, F, S)") {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto h = static_cast<std::size_t>(rng.uniform_int(1, 64));
    const auto w = static_cast<std::size_t>(rng.uniform_int(1, 64));
    const auto f = static_cast<std::size_t>(rng.uniform_int(1, static_cast<long>(std::min(h, w))));
    const auto s = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto r = pool_forward(Volume(2, h, w), PoolSpec{f, s});
    CHECK(r.output.height() == (h - f) / s + 1);
    CHECK(r.output.width() == (w - f) / s + 1);
    CHECK(r.output.channels() == 2);
  }
}

TEST_CASE("pool_forward: each output is the max of its window") {
  Rng rng(23);
  const Volume in = oracle::random_volume(rng, Shape{2, 7, 9});
  const PoolSpec spec{3, 2};
  const auto r = pool_forward(in, spec);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t oy = 0; oy < r.output.height(); ++oy) {
      for (std::size_t ox = 0; ox < r.output.width(); ++ox) {
        double m = -1e300;
        for (std::size_t u = 0; u < 3; ++u) {
          for (std::size_t v = 0; v < 3; ++v) m = std::max(m, in.at(c, oy * 2 + u, ox * 2 + v));
        }
        CHECK(r.output.at(c, oy, ox) == m);
      }
    }
  }
}

TEST_CASE("dense_forward") {
  DenseParams eye(3, 3);
  for (std::size_t i = 0; i < 3; ++i) eye.weight(i, i) = 1.0;
  const std::vector<double> x{0.25, -1.0, 3.0};
  CHECK(dense_forward(x, eye) == x);

  DenseParams p(2, 2);
  p.weights = {1, 1, 0, 1};
  p.biases = {0.5, 0};
  const std::vector<double> in{1, 2};
  CHECK(dense_forward(in, p) == std::vector<double>{3.5, 2.0});

  CHECK(dense_forward(std::vector<double>(10, 0.1), DenseParams(5, 10)).size() == 5);
  CHECK_THROWS_AS(dense_forward(std::vector<double>(9), DenseParams(5, 10)), ShapeError);
}

TEST_CASE("relu") {
  CHECK(relu(std::vector<double>{-1, 0, 2}) == std::vector<double>{0, 0, 2});
  const std::vector<double> pos{0, 1, 2.5};
  CHECK(relu(pos) == pos);
  CHECK(relu(std::vector<double>{-3, -0.1}) == std::vector<double>{0, 0});
}

TEST_CASE("softmax") {
  for (double p : softmax(std::vector<double>(5, 0.0))) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));

  const auto big = softmax(std::vector<double>{1000, 0});
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] < 1e-300);
  CHECK(std::isfinite(big[1]));

  const auto r = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(std::abs(r[0] - 1.0 / 6) < 1e-15);
  CHECK(std::abs(r[1] - 2.0 / 6) < 1e-15);
  CHECK(std::abs(r[2] - 3.0 / 6) < 1e-15);

  CHECK_THROWS_AS(softmax(std::vector<double>{}), ShapeError);
}

TEST_CASE("softmax properties on random logits") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(static_cast<std::size_t>(rng.uniform_int(1, 10)));
    for (double& v : z) v = rng.uniform(-20, 20);
    const auto p = softmax(z);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    for (double v : p) CHECK((v > 0.0 && v <= 1.0));
    CHECK(std::max_element(p.begin(), p.end()) - p.begin() ==
          std::max_element(z.begin(), z.end()) - z.begin());
    const double c = rng.uniform(-50, 50);
    std::vector<double> shifted = z;
    for (double& v : shifted) v += c;
    const auto q = softmax(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - q[k]) < 1e-12);
  }
}

TEST_CASE("network construction validates layer shapes") {
  CHECK_NOTHROW(Network(Shape{5, 1, 1}, {Softmax{}}));
  CHECK_THROWS_AS(Network(Shape{5, 1, 1}, {Softmax{}, Softmax{}}), ShapeError);
  CHECK_THROWS_AS(Network(Shape{5, 1, 1}, {DenseParams(3, 5)}), ShapeError);
  CHECK_THROWS_AS(Network(Shape{5, 1, 1}, {DenseParams(3, 4), Softmax{}}), ShapeError);
  // Dense needs a flat input.
  CHECK_THROWS_AS(Network(Shape{1, 2, 2}, {DenseParams(3, 4), Softmax{}}), ShapeError);
  try {
    Network(Shape{1, 4, 4}, {PoolSpec{2, 2}, PoolSpec{3, 1}, Flatten{}, Softmax{}});
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
  const Network net(Shape{4, 1, 1}, {DenseParams(3, 4), Relu{}, DenseParams(2, 3), Softmax{}});
  CHECK(net.head_index() == 2u);
  CHECK(net.class_count() == 2);
  CHECK(net.parameter_count() == 12 + 3 + 6 + 2);
}

TEST_CASE("forward") {
  const std::vector<double> z{0.3, -1.0, 2.0, 0.0, 0.5};
  const Network sm(Shape{5, 1, 1}, {Softmax{}});
  CHECK(forward(sm, Volume::vector(z)).probabilities == softmax(z));

  DenseParams eye(5, 5);
  for (std::size_t i = 0; i < 5; ++i) eye.weight(i, i) = 1.0;
  const Network two(Shape{5, 1, 1}, {eye, Softmax{}});
  for (double p : forward(two, Volume(5, 1, 1)).probabilities) CHECK(p == doctest::Approx(0.2));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testnets::make_instance(testnets::Focus::full, rng);
    const auto p = forward(inst.net, inst.input).probabilities;
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(forward(two, Volume(4, 1, 1)), ShapeError);
}

TEST_CASE("forward is bitwise deterministic") {
  Rng rng(37);
  auto inst = testnets::make_instance(testnets::Focus::full, rng);
  const auto a = forward(inst.net, inst.input);
  const auto b = forward(inst.net, inst.input);
  CHECK(a.probabilities == b.probabilities);
}

TEST_CASE("backward: logit gradient is p - t") {
  const Network sm(Shape{2, 1, 1}, {Softmax{}});
  const auto fwd = forward(sm, Volume::vector({0.0, 0.0}));
  const auto g = backward(sm, fwd.cache, one_hot(0, 2));
  CHECK(g.input[0] == -0.5);
  CHECK(g.input[1] == 0.5);
}

TEST_CASE("backward: zero head gradient at a perfect fit") {
  // Huge logit margin makes p == t exactly in double precision.
  DenseParams head(2, 1);
  head.weights = {1000.0, -1000.0};
  const Network net(Shape{1, 1, 1}, {head, Softmax{}});
  const auto fwd = forward(net, Volume::vector({1.0}));
  REQUIRE(fwd.probabilities == std::vector<double>{1.0, 0.0});
  const auto g = backward(net, fwd.cache, one_hot(0, 2));
  for (const auto& block : g.blocks) {
    for (double v : block) CHECK(v == 0.0);
  }
}

TEST_CASE("backward: contract checks") {
  const Network a(Shape{3, 1, 1}, {DenseParams(2, 3), Softmax{}});
  const Network b(Shape{3, 1, 1}, {DenseParams(3, 3), Relu{}, DenseParams(2, 3), Softmax{}});
  const auto fwd = forward(a, Volume(3, 1, 1));
  CHECK_THROWS_AS(backward(b, fwd.cache, one_hot(0, 2)), ContractError);
  CHECK_THROWS_AS(backward(a, fwd.cache, one_hot(0, 3)), ShapeError);
  const std::vector<double> soft{0.5, 0.5};
  CHECK_THROWS_AS(backward(a, fwd.cache, soft), DataError);
}

TEST_CASE("backward matches an independent finite-difference oracle") {
  Rng rng(41);
  for (auto focus : {testnets::Focus::conv, testnets::Focus::dense, testnets::Focus::full}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto inst = testnets::make_instance(focus, rng);
      const auto fwd = forward(inst.net, inst.input);
      const auto g = backward(inst.net, fwd.cache, one_hot(inst.label, inst.net.class_count()));
      const auto numeric = oracle::numeric_param_grads(inst.net, inst.input, inst.label, 1e-5);
      REQUIRE(numeric.size() == g.blocks.size());
      for (std::size_t b = 0; b < numeric.size(); ++b) {
        for (std::size_t n = 0; n < numeric[b].size(); ++n) {
          CHECK(relative_error(g.blocks[b][n], numeric[b][n]) < 1e-4);
        }
      }
    }
  }
}

TEST_CASE("grad_check") {
  Rng rng(43);
  auto full = testnets::make_instance(testnets::Focus::full, rng);
  CHECK(grad_check(full.net, full.input, one_hot(full.label, full.net.class_count()), 1e-5) < 1e-4);

  auto dense = testnets::make_instance(testnets::Focus::dense, rng);
  CHECK(grad_check(dense.net, dense.input, one_hot(dense.label, dense.net.class_count()), 1e-5) <
        1e-6);

  auto pool = testnets::make_instance(testnets::Focus::pool, rng);
  CHECK(grad_check_input(pool.net, pool.input, one_hot(pool.label, pool.net.class_count()), 1e-5) <
        1e-4);

  // Dead ReLU units give exactly zero analytic and numeric gradients.
  DenseParams first(2, 2);
  first.weights = {-1, -1, -1, -1};
  first.biases = {-5, -5};
  const Network dead(Shape{2, 1, 1}, {first, Relu{}, DenseParams(2, 2), Softmax{}});
  const double err = grad_check(dead, Volume::vector({1.0, 1.0}), one_hot(1, 2), 1e-5);
  CHECK(std::isfinite(err));
  CHECK(err < 1e-6);
  CHECK(relative_error(0.0, 0.0) == 0.0);

  CHECK_THROWS_AS(grad_check(dead, Volume::vector({1.0, 1.0}), one_hot(1, 2), 0.0), UsageError);
}
