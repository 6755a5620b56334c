#pragma once

#include <span>

namespace xfer {

/// Probabilities below this are clamped before the log.
inline constexpr double kLogClamp = 1e-15;

/// -sum_k t_k * ln(max(p_k, 1e-15)). Throws ShapeError on length mismatch.
double cross_entropy(std::span<const double> probs, std::span<const double> target);

}  // namespace xfer
