// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Small text helpers shared by the CSV and grid readers.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atlas::text {

std::vector<std::string_view> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s) noexcept;

std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<long long> parse_int(std::string_view s) noexcept;

/// Shortest representation that parses back to the same double.
std::string format_shortest(double v);
/// printf-style "%.*g".
std::string format_significant(double v, int digits);
std::string format_fixed(double v, int decimals);

/// Line reader that strips '\r', skips blank lines and '#' comment lines,
/// and tracks the 1-based physical line number.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

}  // namespace atlas::text
