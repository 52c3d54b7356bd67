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
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stereo::gbce {

struct Token {
  std::size_t index = 0;  // 1-based
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::size_t head = 0;  // 0 for the root
  std::string deprel;
  bool space_after = true;
};

struct ParsedSentence {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string text;  // from the `# text =` comment, may be empty
  std::vector<Token> tokens;
  std::size_t root = 0;

  const Token& token(std::size_t index) const { return tokens.at(index - 1); }
  std::vector<std::size_t> children(std::size_t index) const;
  // Token indices of the subtree rooted at `index`, ascending.
  std::vector<std::size_t> subtree(std::size_t index) const;
  // Surface text of tokens [first, last] honouring SpaceAfter.
  std::string render(std::size_t first, std::size_t last) const;
};

// Parses CoNLL-U. Sentence metadata comes from `# doc_id = ...`,
// `# sentence_index = ...` and `# text = ...`. Multiword-token ranges and
// empty nodes are skipped. Throws ParseError when a sentence is not a tree.
std::vector<ParsedSentence> parse_conllu(std::string_view text);
std::vector<ParsedSentence> load_conllu(const std::filesystem::path& path);

using ParseIndex = std::map<std::pair<std::string, std::size_t>, ParsedSentence>;
ParseIndex index_by_sentence(std::vector<ParsedSentence> sentences);

}  // namespace stereo::gbce
