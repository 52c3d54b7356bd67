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

#include "stereo/regex_dialect.hpp"

#include <vector>

namespace stereo {
namespace {

// Translated text plus, for each output byte, the source offset it came from.
struct Translation {
  std::string text;
  std::vector<long> origin;

  void put(char c, long from) {
    text.push_back(c);
    origin.push_back(from);
  }
};

Translation translate(std::string_view src) {
  Translation t;
  t.text.reserve(src.size());
  bool in_class = false;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\' && i + 1 < src.size()) {
      t.put(c, static_cast<long>(i));
      t.put(src[i + 1], static_cast<long>(i + 1));
      i += 2;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      t.put(c, static_cast<long>(i));
      ++i;
      continue;
    }
    if (c == '[') {
      in_class = true;
      t.put(c, static_cast<long>(i));
      ++i;
      // A leading ']' (or '^]') is a literal member of the class.
      if (i < src.size() && src[i] == '^') t.put(src[i], static_cast<long>(i)), ++i;
      if (i < src.size() && src[i] == ']') t.put(src[i], static_cast<long>(i)), ++i;
      continue;
    }
    if (c == '(' && src.substr(i, 4) == "(?P<") {
      t.put('(', static_cast<long>(i));
      t.put('?', static_cast<long>(i + 1));
      t.put('<', static_cast<long>(i + 3));
      i += 4;
      continue;
    }
    if (c == '(' && src.substr(i, 4) == "(?P=") {
      auto close = src.find(')', i + 4);
      if (close != std::string_view::npos) {
        t.put('\\', static_cast<long>(i));
        t.put('k', static_cast<long>(i + 1));
        t.put('<', static_cast<long>(i + 3));
        for (std::size_t k = i + 4; k < close; ++k) t.put(src[k], static_cast<long>(k));
        t.put('>', static_cast<long>(close));
        i = close + 1;
        continue;
      }
    }
    t.put(c, static_cast<long>(i));
    ++i;
  }
  return t;
}

}  // namespace

std::string translate_named_groups(std::string_view source) { return translate(source).text; }

std::vector<std::string> named_groups(std::string_view source) {
  std::string text = translate(source).text;
  std::vector<std::string> names;
  bool in_class = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
      if (i + 1 < text.size() && text[i + 1] == '^') ++i;
      if (i + 1 < text.size() && text[i + 1] == ']') ++i;
      continue;
    }
    if (c == '(' && text.compare(i, 3, "(?<") == 0 && i + 3 < text.size() && text[i + 3] != '=' &&
        text[i + 3] != '!') {
      auto close = text.find('>', i + 3);
      if (close == std::string::npos) break;
      names.push_back(text.substr(i + 3, close - i - 3));
      i = close;
    }
  }
  return names;
}

bool compile_pattern(std::string_view source, boost::regex& out, RegexDiagnostic& diag) {
  Translation t = translate(source);
  try {
    out.assign(t.text, boost::regex::perl);
    return true;
  } catch (const boost::regex_error& e) {
    diag.message = e.what();
    auto pos = static_cast<long>(e.position());
    if (pos >= 0 && static_cast<std::size_t>(pos) < t.origin.size()) {
      diag.position = t.origin[static_cast<std::size_t>(pos)];
    } else if (pos >= 0) {
      diag.position = static_cast<long>(source.size());
    }
    return false;
  }
}

}  // namespace stereo
