#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace spdlog {
class logger;
}

namespace tokenscope {

// Library logger. Writes to standard error only.
spdlog::logger& logger();

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace tokenscope
