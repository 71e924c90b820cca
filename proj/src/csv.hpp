#pragma once

// Minimal CSV helpers shared by the file-format modules (no quoting: every
// field in these formats is numeric or an identifier).

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "shadecal/error.hpp"

namespace shadecal::csv {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  for (char ch : text) {
    if (ch == '\n') {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
      line.clear();
    } else {
      line += ch;
    }
  }
  if (!line.empty()) lines.push_back(line);
  return lines;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::string where(std::size_t line_number) { return "line " + std::to_string(line_number); }

inline double parse_finite(const std::string& field, std::size_t line_number) {
  double value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::Parse, where(line_number) + ": invalid number '" + field + "'");
  }
  return value;
}

inline long long parse_integer(const std::string& field, std::size_t line_number) {
  long long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorKind::Parse, where(line_number) + ": invalid integer '" + field + "'");
  }
  return value;
}

}  // namespace shadecal::csv
