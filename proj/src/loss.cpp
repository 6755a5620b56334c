#include "xfer/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xfer/error.hpp"

namespace xfer {

double cross_entropy(std::span<const double> probs, std::span<const double> target) {
  if (probs.size() != target.size()) {
    throw ShapeError("cross-entropy: " + std::to_string(probs.size()) + " probabilities vs " +
                     std::to_string(target.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (target[k] != 0.0) loss -= target[k] * std::log(std::max(probs[k], kLogClamp));
  }
  return loss;
}

}  // namespace xfer
