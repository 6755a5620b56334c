#include <doctest.h>

#include "random_nets.hpp"
#include "xfer/error.hpp"
#include "xfer/model_io.hpp"
#include "xfer/train.hpp"

using namespace xfer;

TEST_CASE("model JSON round trip is bitwise stable") {
  Rng rng(7);
  for (auto focus : {testnets::Focus::conv, testnets::Focus::pool, testnets::Focus::full}) {
    auto inst = testnets::make_instance(focus, rng);
    // Awkward doubles: subnormal-ish, many digits.
    auto blocks = inst.net.parameter_blocks();
    if (!blocks.empty()) {
      blocks[0][0] = 1.0 / 3.0;
      blocks[0].back() = -2.2250738585072014e-308;
    }
    const std::string text = model_to_json(inst.net);
    const Network back = model_from_json(text);
    CHECK(back == inst.net);
    CHECK(model_to_json(back) == text);
    CHECK(predict(back, inst.input) == predict(inst.net, inst.input));
  }
}

TEST_CASE("model JSON records shapes and head") {
  const Network net = make_cnn(CnnSpec{Shape{3, 16, 16}, {4}, 8, 3}, 1);
  const std::string text = model_to_json(net);
  CHECK(text.find("\"format\": \"xfer-model\"") != std::string::npos);
  CHECK(text.find("\"head_index\": " + std::to_string(*net.head_index())) != std::string::npos);
  CHECK(model_from_json(text).head_index() == net.head_index());
}

TEST_CASE("model JSON rejects malformed documents") {
  CHECK_THROWS_AS(model_from_json("not json"), DataError);
  CHECK_THROWS_AS(model_from_json(R"({"format":"other","version":1})"), DataError);
  CHECK_THROWS_AS(model_from_json(R"({"format":"xfer-model","version":99,"layers":[]})"),
                  DataError);
  const Network net(Shape{2, 1, 1}, {DenseParams(2, 2), Softmax{}});
  std::string text = model_to_json(net);
  // Truncate the weights array so shapes disagree.
  const auto pos = text.find("\"weights\"");
  REQUIRE(pos != std::string::npos);
  std::string broken = text;
  broken.replace(broken.find('[', pos), broken.find(']', pos) - broken.find('[', pos) + 1, "[0]");
  CHECK_THROWS_AS(model_from_json(broken), ShapeError);
}
