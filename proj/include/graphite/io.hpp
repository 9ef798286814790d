#pragma once

#include <filesystem>
#include <string>

namespace graphite::io {

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace graphite::io
