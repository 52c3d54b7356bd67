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

#include "stereo/conllu.hpp"

#include <charconv>
#include <sstream>

#include "stereo/error.hpp"
#include "stereo/text.hpp"

namespace stereo::gbce {

std::vector<std::size_t> ParsedSentence::children(std::size_t index) const {
  std::vector<std::size_t> out;
  for (const auto& t : tokens) {
    if (t.head == index) out.push_back(t.index);
  }
  return out;
}

std::vector<std::size_t> ParsedSentence::subtree(std::size_t index) const {
  std::vector<bool> in(tokens.size() + 1, false);
  std::vector<std::size_t> stack{index};
  in[index] = true;
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& t : tokens) {
      if (t.head == cur && !in[t.index]) {
        in[t.index] = true;
        stack.push_back(t.index);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= tokens.size(); ++i) {
    if (in[i]) out.push_back(i);
  }
  return out;
}

std::string ParsedSentence::render(std::size_t first, std::size_t last) const {
  std::string out;
  for (std::size_t i = first; i <= last; ++i) {
    const auto& t = token(i);
    out += t.form;
    if (i < last && t.space_after) out += ' ';
  }
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

std::size_t to_index(const std::string& s, std::size_t lineno) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("CoNLL-U line " + std::to_string(lineno) + ": bad index '" + s + "'");
  }
  return v;
}

void finish(ParsedSentence& s, std::size_t lineno, std::vector<ParsedSentence>& out) {
  if (s.tokens.empty()) return;
  std::size_t roots = 0;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& t = s.tokens[i];
    if (t.index != i + 1) throw ParseError("CoNLL-U sentence ending line " + std::to_string(lineno) + ": token ids not contiguous");
    if (t.head > s.tokens.size()) throw ParseError("CoNLL-U sentence ending line " + std::to_string(lineno) + ": head out of range");
    if (t.head == 0) {
      ++roots;
      s.root = t.index;
    }
  }
  if (roots != 1) throw ParseError("CoNLL-U sentence ending line " + std::to_string(lineno) + ": expected exactly one root");
  // Every token must reach the root without revisiting a node.
  for (const auto& t : s.tokens) {
    std::size_t cur = t.index;
    for (std::size_t steps = 0; cur != 0; ++steps) {
      if (steps > s.tokens.size()) throw ParseError("CoNLL-U sentence ending line " + std::to_string(lineno) + ": cycle in heads");
      cur = s.token(cur).head;
    }
  }
  out.push_back(std::move(s));
}

}  // namespace

std::vector<ParsedSentence> parse_conllu(std::string_view text) {
  std::vector<ParsedSentence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  ParsedSentence cur;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      finish(cur, lineno, out);
      cur = ParsedSentence{};
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = std::string(trim(std::string_view(line).substr(1, eq - 1)));
      auto value = std::string(trim(std::string_view(line).substr(eq + 1)));
      if (key == "doc_id") cur.doc_id = value;
      if (key == "sentence_index") cur.sentence_index = to_index(value, lineno);
      if (key == "text") cur.text = value;
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 10) throw ParseError("CoNLL-U line " + std::to_string(lineno) + ": expected 10 columns");
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    Token t;
    t.index = to_index(cols[0], lineno);
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    t.head = cols[6] == "_" ? 0 : to_index(cols[6], lineno);
    t.deprel = cols[7];
    t.space_after = cols[9].find("SpaceAfter=No") == std::string::npos;
    cur.tokens.push_back(std::move(t));
  }
  finish(cur, lineno, out);
  return out;
}

std::vector<ParsedSentence> load_conllu(const std::filesystem::path& path) { return parse_conllu(read_file(path)); }

ParseIndex index_by_sentence(std::vector<ParsedSentence> sentences) {
  ParseIndex idx;
  for (auto& s : sentences) {
    auto key = std::make_pair(s.doc_id, s.sentence_index);
    idx.emplace(std::move(key), std::move(s));
  }
  return idx;
}

}  // namespace stereo::gbce
