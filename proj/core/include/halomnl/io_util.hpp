#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace halomnl {

/// Render a double with 17 significant digits (%.17g), enough to round-trip
/// the exact bit pattern through text.
std::string format_double(double value);

/// Split one CSV line on commas. No quoting; fields must not contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

/// Read a whole text file; throws std::runtime_error on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Write a whole text file atomically enough for our purposes; throws on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace halomnl
