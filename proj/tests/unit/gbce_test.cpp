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

#include <gtest/gtest.h>

#include <fstream>

#include "stereo/error.hpp"
#include "stereo/gbce.hpp"
#include "test_support.hpp"

namespace stereo::gbce {
namespace {

// Builds a tree from "form/upos/xpos/head/deprel" items; lemma = lowercase form.
ParsedSentence tree(std::initializer_list<const char*> items) {
  std::string text;
  std::size_t i = 0;
  for (const char* item : items) {
    std::vector<std::string> f;
    std::string cur;
    for (const char* p = item; *p; ++p) {
      if (*p == '/') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += *p;
      }
    }
    f.push_back(cur);
    text += std::to_string(++i) + "\t" + f[0] + "\t" + to_lower_ascii(f[0]) + "\t" + f[1] + "\t" + f[2] + "\t_\t" +
            f[3] + "\t" + f[4] + "\t_\t_\n";
  }
  return parse_conllu(text + "\n").at(0);
}

std::vector<std::string> np_texts(const ParsedSentence& p) {
  std::vector<std::string> out;
  for (const auto& np : extract_noun_phrases(p)) out.push_back(np.text);
  return out;
}

TEST(Preprocess, WorkedSentence) {
  std::string s =
      "There was no significant effect for sex, (t(38) = 1.7, p = .097) despite women attaining higher scores "
      "than men";
  rules::StatisticRecord r;
  r.span = {s.find("(t("), s.find(") despite") + 1};
  auto clean = preprocess_tree_input(s, {r});
  EXPECT_EQ(clean.text, "There was no significant effect for sex, despite women attaining higher scores than men");
  EXPECT_TRUE(clean.warnings.empty());
  // Parentheses alone are enough, even without the record span.
  EXPECT_EQ(preprocess_tree_input(s, {}).text, clean.text);
}

TEST(Preprocess, SemicolonIdentityAndUnbalanced) {
  EXPECT_EQ(preprocess_tree_input("A; B", {}).text, "A");
  EXPECT_EQ(preprocess_tree_input("Plain text stays.", {}).text, "Plain text stays.");
  auto open = preprocess_tree_input("Dose mattered (p = .01 in adults", {});
  EXPECT_EQ(open.text, "Dose mattered");
  EXPECT_EQ(open.warnings.size(), 1u);
  auto stray = preprocess_tree_input("Dose mattered) a lot", {});
  EXPECT_EQ(stray.text, "Dose mattered a lot");
  EXPECT_EQ(stray.warnings.size(), 1u);
}

TEST(Preprocess, QuotationsAreAtomic) {
  auto c = preprocess_tree_input("Those who answered \"yes (always)\" differed (p < .05).", {});
  EXPECT_EQ(c.text, "Those who answered \"yes (always)\" differed.");
  auto u = preprocess_tree_input("Users of \xE2\x80\x9C" "drug (A)\xE2\x80\x9D improved; rest dropped", {});
  EXPECT_EQ(u.text, "Users of \xE2\x80\x9C" "drug (A)\xE2\x80\x9D improved");
}

TEST(NounPhrases, ModifiersAndDeterminers) {
  // a positive statistically significant correlation between perceived knowledge and measured basic knowledge
  auto p = tree({"a/DET/DT/5/det", "positive/ADJ/JJ/5/amod", "statistically/ADV/RB/4/advmod",
                 "significant/ADJ/JJ/5/amod", "correlation/NOUN/NN/0/root", "between/ADP/IN/5/prep",
                 "perceived/VERB/VBN/8/amod", "knowledge/NOUN/NN/6/pobj", "and/CCONJ/CC/8/cc",
                 "measured/VERB/VBN/12/amod", "basic/ADJ/JJ/12/amod", "knowledge/NOUN/NN/8/conj"});
  auto nps = extract_noun_phrases(p);
  ASSERT_FALSE(nps.empty());
  EXPECT_EQ(nps[0].head, 5u);
  EXPECT_TRUE(nps[0].modifiers.count("prep"));
  EXPECT_EQ(nps[0].text,
            "a positive statistically significant correlation between perceived knowledge and measured basic "
            "knowledge");
}

TEST(NounPhrases, TrivialCases) {
  EXPECT_EQ(np_texts(tree({"women/NOUN/NNS/0/root"})), std::vector<std::string>{"women"});
  EXPECT_TRUE(np_texts(tree({"went/VERB/VBD/0/root", "quickly/ADV/RB/1/advmod"})).empty());
}

TEST(NounPhrases, QuotationIsAbsorbedWhole) {
  auto p = tree({"the/DET/DT/2/det", "group/NOUN/NN/0/root", "\"/PUNCT/``/5/punct", "low/ADJ/JJ/5/amod",
                 "risk/NOUN/NN/2/appos", "\"/PUNCT/''/5/punct"});
  auto texts = np_texts(p);
  ASSERT_EQ(texts.size(), 2u);
  EXPECT_EQ(texts[0], "the group \" low risk \"");
  EXPECT_EQ(texts[1], "\" low risk \"");
}

TEST(NounPhrases, SpanContainsHead) {
  for (const auto& [key, s] : index_by_sentence(load_conllu(testing::data_path("gbce_fixtures.conllu")))) {
    for (const auto& np : extract_noun_phrases(s)) {
      EXPECT_LE(np.first, np.head);
      EXPECT_GE(np.last, np.head);
      EXPECT_NE(s.token(np.head).upos, "VERB");
    }
  }
}

class Fixtures : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    index_ = new ParseIndex(index_by_sentence(load_conllu(testing::data_path("gbce_fixtures.conllu"))));
    std::ifstream in(testing::data_path("gbce_labels.json"));
    labels_ = new nlohmann::json(nlohmann::json::parse(in));
  }
  static void TearDownTestSuite() {
    delete index_;
    delete labels_;
  }
  static ConditionSet run(const std::string& doc) {
    const auto& p = index_->at({doc, 0});
    return apply_condition_rules(p, extract_noun_phrases(p), bundled_grammar_rules());
  }
  static std::vector<std::string> label(const std::string& doc) {
    return (*labels_)[doc]["conditions"].get<std::vector<std::string>>();
  }
  static ParseIndex* index_;
  static nlohmann::json* labels_;
};
ParseIndex* Fixtures::index_ = nullptr;
nlohmann::json* Fixtures::labels_ = nullptr;

TEST_F(Fixtures, ComparativeIsTerminal) {
  auto c = run("gbce-01");
  EXPECT_EQ(c.conditions, (std::vector<std::string>{"women", "men"}));
  EXPECT_NE(std::find(c.rule_trace.begin(), c.rule_trace.end(), "comparative-than"), c.rule_trace.end());
  for (const auto& id : c.rule_trace) {
    EXPECT_TRUE(id == "comparative-than" || id == "pronoun-head") << id;
  }
}

TEST_F(Fixtures, RelativeClauseAccepted) {
  EXPECT_EQ(run("gbce-06").conditions, label("gbce-06"));
}

TEST_F(Fixtures, PronounSubjectExcluded) {
  auto c = run("gbce-16");
  for (const auto& s : c.conditions) EXPECT_NE(s, "We");
  EXPECT_TRUE(run("gbce-15").conditions.empty());
}

TEST_F(Fixtures, EnumerationSplitsDistributedHead) {
  EXPECT_EQ(run("gbce-10").conditions, (std::vector<std::string>{"group A", "group B", "group C"}));
}

// Every enumeration member lies inside the sentence, and the members do
// not share tokens.
TEST_F(Fixtures, EnumerationMembersPartitionConjuncts) {
  for (const char* doc : {"gbce-11", "gbce-12", "gbce-13", "gbce-14"}) {
    const auto& p = index_->at({doc, 0});
    auto c = run(doc);
    std::string text = p.render(1, p.tokens.size());
    std::size_t pos = 0;
    for (const auto& cond : c.conditions) {
      auto at = text.find(cond, pos);
      ASSERT_NE(at, std::string::npos) << doc << ": " << cond;
      pos = at + cond.size();
    }
  }
}

TEST_F(Fixtures, ExactMatchesAgainstLabels) {
  std::size_t exact = 0;
  std::string misses;
  for (const auto& [doc, _] : labels_->items()) {
    if (run(doc).conditions == label(doc)) {
      ++exact;
    } else {
      misses += " " + doc;
    }
  }
  EXPECT_GE(exact, 18u) << "mismatched:" << misses;
}

TEST_F(Fixtures, DeterministicTraceAndSet) {
  for (const auto& [doc, _] : labels_->items()) {
    auto a = run(doc);
    auto b = run(doc);
    EXPECT_EQ(a.conditions, b.conditions);
    EXPECT_EQ(a.rule_trace, b.rule_trace);
  }
}

TEST(ExtractConditions, NoParseOutcome) {
  auto r = extract_conditions("Men slept more (p = .01).", {}, nullptr, bundled_grammar_rules());
  EXPECT_EQ(r.outcome, Outcome::no_parse);
  EXPECT_EQ(r.clean_text, "Men slept more.");
  EXPECT_TRUE(r.set.conditions.empty());
}

TEST(ExtractConditions, PronounOnlySentenceIsEmpty) {
  auto p = tree({"They/PRON/PRP/2/nsubj", "saw/VERB/VBD/0/root", "it/PRON/PRP/2/obj"});
  auto r = extract_conditions("They saw it", {}, &p, bundled_grammar_rules());
  EXPECT_EQ(r.outcome, Outcome::ok);
  EXPECT_TRUE(r.set.conditions.empty());
  EXPECT_EQ(r.set.rule_trace, std::vector<std::string>{"pronoun-head"});
}

TEST(GrammarRules, RoundTripAndErrors) {
  auto g = bundled_grammar_rules();
  auto back = grammar_rules_from_json(to_json(g));
  EXPECT_EQ(to_json(back), to_json(g));
  EXPECT_THROW(grammar_rules_from_json(nlohmann::json::parse(R"({"negative": [], "positive": [{"id": "x", "kind": "odd", "match": {"family": "np_accept"}}]})")),
               ParseError);
  EXPECT_THROW(grammar_rules_from_json(nlohmann::json::parse(R"({"negative": [{"id": "x", "match": {}}], "positive": []})")),
               ParseError);
  GrammarRules unknown;
  unknown.positive.push_back({"u", false, {{"family", "mystery"}}});
  auto p = tree({"men/NOUN/NNS/0/root"});
  EXPECT_THROW(apply_condition_rules(p, extract_noun_phrases(p), unknown), ConfigError);
}

}  // namespace
}  // namespace stereo::gbce
