#pragma once

#include <filesystem>
#include <string>

namespace shadecal {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace shadecal
