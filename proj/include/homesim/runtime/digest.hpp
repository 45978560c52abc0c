#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace homesim {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Write via a sibling temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace homesim
