#pragma once

#include <filesystem>
#include <string>

#include "xfer/network.hpp"

namespace xfer {

inline constexpr int kModelFormatVersion = 1;

/// Serializes a network as one JSON document: format tag, version, input
/// shape, and the ordered layers with explicit shapes and flat row-major
/// parameter arrays. Doubles are written with round-trip precision, so
/// load(save(net)) == net bitwise.
std::string model_to_json(const Network& net);
Network model_from_json(const std::string& text);

void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace xfer
