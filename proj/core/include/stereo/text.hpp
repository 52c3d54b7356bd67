// Copyright 2026 The STEREO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stereo {

// Half-open byte range [start, end) into a UTF-8 string.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  bool contains(const Span& o) const { return start <= o.start && o.end <= end; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool contains_digit(std::string_view text);

// Maximal runs of ASCII digits.
std::vector<Span> digit_runs(std::string_view text);

// Parses numbers as they appear in statistic reports: "29", "-1.85", ".074",
// "0.37", "+2", and negative values written with a Unicode dash (U+2212 and
// friends). Surrounding whitespace is ignored. Returns nullopt otherwise.
std::optional<double> parse_number(std::string_view text);

// Replaces Unicode minus/dash variants with ASCII '-'.
std::string normalize_minus(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial output.
void write_file(const std::filesystem::path& path, std::string_view content);
void append_line(const std::filesystem::path& path, std::string_view line);

// Shortest round-trip decimal rendering of a double ("0.074", "29").
std::string format_number(double value);

}  // namespace stereo
