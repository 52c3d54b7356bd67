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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereo/conllu.hpp"
#include "stereo/rules.hpp"

namespace stereo::gbce {

struct CleanText {
  std::string text;
  std::vector<std::string> warnings;
};

// Prepares a statistic sentence for dependency parsing: statistic
// fragments and parenthesised content are removed, everything after the
// first semicolon is dropped and whitespace is tidied. Quotations are kept
// intact. An unmatched '(' removes the rest of the sentence.
CleanText preprocess_tree_input(std::string_view sentence, const std::vector<rules::StatisticRecord>& records);

struct NounPhrase {
  std::size_t head = 0;
  std::size_t first = 0;  // inclusive token range
  std::size_t last = 0;
  std::set<std::string> modifiers;  // dependency labels absorbed
  std::string text;

  std::size_t length() const { return last - first + 1; }
  bool overlaps(const NounPhrase& o) const { return first <= o.last && o.first <= last; }
};

// One phrase per NOUN/PROPN/PRON head, expanded with modifier subtrees and
// determiners. A quotation touched by the phrase is absorbed whole.
std::vector<NounPhrase> extract_noun_phrases(const ParsedSentence& parsed);

// Rule pack for condition extraction. Each rule names a family and its
// parameters in `match`; see the bundled grammar_rules.json.
struct GrammarRule {
  std::string id;
  bool terminal = false;  // positive rules only
  nlohmann::json match;
};

struct GrammarRules {
  std::vector<GrammarRule> negative;
  std::vector<GrammarRule> positive;
  std::set<std::string> bag_of_words;
};

GrammarRules grammar_rules_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GrammarRules& g);
GrammarRules load_grammar_rules(const std::filesystem::path& path);
GrammarRules bundled_grammar_rules();

struct ConditionSet {
  std::vector<std::string> conditions;
  std::vector<std::string> rule_trace;
};

ConditionSet apply_condition_rules(const ParsedSentence& parsed, const std::vector<NounPhrase>& nps,
                                   const GrammarRules& rules);

enum class Outcome { ok, no_parse };

struct ConditionResult {
  Outcome outcome = Outcome::ok;
  std::string clean_text;
  ConditionSet set;
  std::vector<std::string> warnings;
};

// `parsed` is null when no tree exists for the sentence.
ConditionResult extract_conditions(std::string_view sentence, const std::vector<rules::StatisticRecord>& records,
                                   const ParsedSentence* parsed, const GrammarRules& rules);

}  // namespace stereo::gbce
