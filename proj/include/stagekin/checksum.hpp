#pragma once

#include <filesystem>
#include <string>

namespace stagekin {

/// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Hex-encoded SHA-256 of a file's contents. Throws IoError if the file
/// cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace stagekin
