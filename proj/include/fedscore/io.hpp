#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fedscore {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fedscore
