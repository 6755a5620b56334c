#include <doctest.h>

#include <cmath>

#include "random_nets.hpp"
#include "xfer/error.hpp"
#include "xfer/eval.hpp"
#include "xfer/loss.hpp"
#include "xfer/train.hpp"

using namespace xfer;

TEST_CASE("cross_entropy") {
  CHECK(cross_entropy(std::vector<double>{0, 1, 0}, one_hot(1, 3)) <= 1e-14);
  CHECK(cross_entropy(std::vector<double>(5, 0.2), one_hot(3, 5)) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(cross_entropy(std::vector<double>{0.9, 0.1}, one_hot(0, 2)) ==
        doctest::Approx(0.105360515657826).epsilon(1e-12));
  // Clamp keeps -ln(0) finite.
  CHECK(cross_entropy(std::vector<double>{1.0, 0.0}, one_hot(1, 2)) ==
        doctest::Approx(-std::log(1e-15)));
  CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.5, 0.5}, one_hot(0, 3)), ShapeError);
}

TEST_CASE("sgd_step") {
  std::vector<double> theta{1.0, -2.0};
  const std::vector<double> g{2.0, 3.0};
  sgd_step(theta, g, 0.0);
  CHECK(theta == std::vector<double>{1.0, -2.0});

  std::vector<double> one{1.0};
  sgd_step(one, std::vector<double>{2.0}, 0.1);
  CHECK(one[0] == doctest::Approx(0.8));

  // Loss theta^2 has gradient 2 theta; each step multiplies theta by 0.8.
  std::vector<double> q{1.0};
  for (int i = 0; i < 100; ++i) sgd_step(q, std::vector<double>{2.0 * q[0]}, 0.1);
  CHECK(std::abs(q[0]) < 1e-8);
  CHECK(q[0] == doctest::Approx(std::pow(0.8, 100)).epsilon(1e-9));

  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(sgd_step(two, std::vector<double>{1.0}, 0.1), ContractError);
}

TEST_CASE("one small SGD step lowers the loss of its example") {
  Rng rng(53);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto focus = trial % 3 == 0   ? testnets::Focus::conv
                       : trial % 3 == 1 ? testnets::Focus::dense
                                        : testnets::Focus::full;
    auto inst = testnets::make_instance(focus, rng);
    const auto target = one_hot(inst.label, inst.net.class_count());
    const auto fwd = forward(inst.net, inst.input);
    const double before = cross_entropy(fwd.probabilities, target);
    const auto g = backward(inst.net, fwd.cache, target);
    double norm = 0.0;
    for (const auto& b : g.blocks) {
      for (double v : b) norm += v * v;
    }
    if (norm == 0.0) continue;
    Network stepped = inst.net;
    sgd_step(stepped, g, 1e-3);
    CHECK(cross_entropy(predict(stepped, inst.input), target) < before);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK(c.learning_rate == 0.01);
  CHECK(c.batch_size == 32);
  CHECK(c.epochs == 50);
  CHECK(c.validation_fraction == 0.2);
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("initialize_parameters stays inside the uniform bound") {
  Network net = make_cnn(CnnSpec{Shape{3, 8, 8}, {4}, 6, 3}, 99);
  for (const auto& layer : net.layers()) {
    if (const auto* d = std::get_if<DenseParams>(&layer)) {
      const double limit = std::sqrt(6.0 / static_cast<double>(d->in_units + d->out_units));
      for (double w : d->weights) CHECK(std::abs(w) <= limit);
      for (double b : d->biases) CHECK(b == 0.0);
    }
  }
  Network again = make_cnn(CnnSpec{Shape{3, 8, 8}, {4}, 6, 3}, 99);
  CHECK(again == net);
  CHECK(make_cnn(CnnSpec{Shape{3, 8, 8}, {4}, 6, 3}, 100) != net);
}

namespace {

// Two well separated Gaussian-ish blobs in 4-D.
std::vector<Example> blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    std::vector<double> x(4);
    for (double& v : x) v = (label == 0 ? -1.0 : 1.0) + rng.uniform(-0.5, 0.5);
    out.push_back(Example{Volume::vector(std::move(x)), label});
  }
  return out;
}

}  // namespace

TEST_CASE("train_full") {
  const auto train = blobs(40, 1);
  const auto val = blobs(20, 2);
  const Network init(Shape{4, 1, 1}, {DenseParams(2, 4), Softmax{}});
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 1;
  cfg.batch_size = 8;

  SUBCASE("one epoch, one log entry") {
    const auto r = train_full(init, ExampleSpan(train), ExampleSpan(val), cfg);
    CHECK(r.log.epochs.size() == 1);
  }
  SUBCASE("zero epochs rejected") {
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_full(init, ExampleSpan(train), ExampleSpan(val), cfg), UsageError);
  }
  SUBCASE("empty split rejected") {
    CHECK_THROWS_AS(train_full(init, ExampleSpan({}), ExampleSpan(val), cfg), UsageError);
    CHECK_THROWS_AS(train_full(init, ExampleSpan(train), ExampleSpan({}), cfg), UsageError);
  }
  SUBCASE("same seed, bitwise identical result") {
    cfg.epochs = 5;
    Network start = init;
    initialize_parameters(start, 3);
    const auto a = train_full(start, ExampleSpan(train), ExampleSpan(val), cfg);
    const auto b = train_full(start, ExampleSpan(train), ExampleSpan(val), cfg);
    CHECK(a.net == b.net);
    CHECK(a.log == b.log);
    cfg.seed = 6;
    const auto c = train_full(start, ExampleSpan(train), ExampleSpan(val), cfg);
    CHECK(c.net != a.net);
  }
  SUBCASE("separable data is learned") {
    cfg.epochs = 30;
    cfg.learning_rate = 0.1;
    std::size_t calls = 0;
    const auto r = train_full(init, ExampleSpan(train), ExampleSpan(val), cfg,
                              [&](std::size_t epoch, const EpochRecord&) { CHECK(epoch == ++calls); });
    CHECK(calls == 30);
    CHECK(r.log.epochs.back().train_accuracy == 1.0);
    CHECK(r.log.epochs.back().train_cross_entropy < r.log.epochs.front().train_cross_entropy);
  }
}

TEST_CASE("evaluate_split") {
  const auto data = blobs(10, 3);
  SUBCASE("uniform network gives ln k") {
    const Network uniform(Shape{4, 1, 1}, {DenseParams(5, 4), Softmax{}});
    std::vector<Example> five = data;
    for (std::size_t i = 0; i < five.size(); ++i) five[i].label = i % 5;
    const auto s = evaluate_split(uniform, ExampleSpan(five));
    CHECK(s.cross_entropy == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("perfect classifier and agreement with the confusion matrix") {
    DenseParams d(2, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      d.weight(0, i) = -1.0;
      d.weight(1, i) = 1.0;
    }
    const Network net(Shape{4, 1, 1}, {d, Softmax{}});
    const auto s = evaluate_split(net, ExampleSpan(data));
    CHECK(s.accuracy == 1.0);
    const auto cm = confusion_from_predictions(s.predictions, 2);
    CHECK(static_cast<double>(cm.trace()) / static_cast<double>(cm.total()) == s.accuracy);
  }
  SUBCASE("mixed predictions agree with the confusion matrix") {
    DenseParams d(2, 4);
    d.weight(1, 0) = 1.0;  // class 1 iff first feature > 0, with noise
    const Network net(Shape{4, 1, 1}, {d, Softmax{}});
    std::vector<Example> noisy = data;
    noisy[0].label = 1 - noisy[0].label;
    noisy[3].label = 1 - noisy[3].label;
    const auto s = evaluate_split(net, ExampleSpan(noisy));
    const auto cm = confusion_from_predictions(s.predictions, 2);
    CHECK(s.accuracy == static_cast<double>(cm.trace()) / 10.0);
    CHECK(s.accuracy == doctest::Approx(0.8));
  }
  CHECK_THROWS_AS(evaluate_split(Network(Shape{2, 1, 1}, {Softmax{}}), ExampleSpan({})),
                  UsageError);
}
