#pragma once

#include <filesystem>
#include <string>

namespace xfer {

/// Writes `contents` to a temporary sibling file and renames it over `path`,
/// creating parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// Fixed-point decimal with `digits` fractional digits ("%.*f").
std::string fixed(double value, int digits = 6);

}  // namespace xfer
