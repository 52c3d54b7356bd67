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

#include <thread>

#include "stereo/session.hpp"
#include "test_support.hpp"

namespace stereo::session {
namespace {

using rules::Param;
using rules::StatType;

const std::string kIbuprofen =
    "The independent sample t-tests indicated that there were not significant differences in the effect of "
    "ibuprofen 400 between males and females, (t(29) = -1.85, p = .074).";

std::vector<ingest::Sentence> candidates() {
  std::vector<ingest::Sentence> out;
  auto add = [&](const std::string& doc, std::size_t idx, const std::string& text) {
    ingest::Sentence s;
    s.doc_id = doc;
    s.index = idx;
    s.text = text;
    s.has_digit = true;
    out.push_back(s);
  };
  add("d1", 0, kIbuprofen);
  add("d1", 1, "Scores rose (t(12) = 2.10, p = .041) after 3 weeks.");
  add("d2", 0, "Enrolment closed at 45.");
  add("d2", 1, "Group means differed (t(40) = 3.3, p = .002).");
  return out;
}

RuleProposal ttest_proposal(const std::string& id = "ttest-1") {
  RuleProposal p;
  p.target = TargetSet::positive;
  p.positive.rule_id = id;
  p.positive.stat_type = StatType::ttest;
  p.positive.pattern = R"((?P<ttest>\(t\s?\(\d+\)\s?=\s?-?\d*\.?\d+\s?,\s?[pP]\s?<?=?\s?\d*\.?\d+\)))";
  p.positive.sub_rules = {{Param::doF, R"(t\s?\((?P<doF>\d+)\))"},
                          {Param::statisticVal, R"(=\s?(?P<statisticVal>-?\d*\.?\d+)\s?,)"},
                          {Param::pval, R"([pP]\s?<?=?\s?(?P<pval>\d*\.?\d+))"}};
  p.positive.apa_template = true;
  p.reported_params = {Param::doF, Param::statisticVal, Param::pval};
  p.trigger_doc_id = "d1";
  p.trigger_index = 0;
  return p;
}

RuleProposal negative_proposal(const std::string& id, const std::string& pattern, const std::string& doc,
                               std::size_t idx) {
  RuleProposal p;
  p.target = TargetSet::negative;
  p.negative = {id, pattern};
  p.trigger_doc_id = doc;
  p.trigger_index = idx;
  return p;
}

Session::Options small_options() {
  Session::Options o;
  o.heldout_size = 10;
  o.sample_size = 10;
  return o;
}

TEST(Session, FreshSessionSurfacesFirstSentenceWithAllDigits) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  auto item = s.next_unclassified();
  ASSERT_TRUE(item);
  EXPECT_EQ(item->sentence.doc_id, "d1");
  EXPECT_EQ(item->sentence.index, 0u);
  EXPECT_EQ(item->uncovered, digit_runs(kIbuprofen));
  auto m = s.metrics();
  EXPECT_EQ(m.version, 0);
  EXPECT_EQ(m.training.covered, 0u);
  EXPECT_EQ(m.heldout.covered, 0u);
}

TEST(Session, WalkThroughOfTheIbuprofenSentence) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());

  auto t = ttest_proposal();
  auto report = s.test_proposal(t);
  EXPECT_FALSE(report.diagnostic);
  EXPECT_TRUE(report.progress());
  EXPECT_EQ(s.accept_proposal(t), 1);
  auto fx = s.fixtures();
  ASSERT_EQ(fx.size(), 1u);
  ASSERT_EQ(fx[0].verdict.records.size(), 1u);
  EXPECT_EQ(fx[0].verdict.records[0].stat_type, StatType::ttest);

  auto item = s.next_unclassified();
  ASSERT_TRUE(item);
  EXPECT_EQ(item->sentence.index, 0u);
  auto at = kIbuprofen.find("400");
  EXPECT_EQ(item->uncovered, (std::vector<Span>{{at, at + 3}}));

  auto neg = negative_proposal("wnw", R"([a-zA-Z]+\s\d+\s[a-zA-Z]+)", "d1", 0);
  auto nr = s.test_proposal(neg);
  ASSERT_FALSE(nr.diagnostic);
  EXPECT_TRUE(nr.diffs.empty());
  EXPECT_TRUE(nr.trigger_uncovered_after.empty());
  ASSERT_FALSE(nr.trigger_matches.empty());
  EXPECT_TRUE(nr.trigger_matches[0].contains({at, at + 3}));
  EXPECT_EQ(s.accept_proposal(neg), 2);

  item = s.next_unclassified();
  ASSERT_TRUE(item);
  EXPECT_EQ(item->sentence.doc_id, "d2");
  EXPECT_EQ(item->sentence.index, 0u);
}

TEST(Session, RejectsUntestedDuplicateAndNoProgress) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  auto t = ttest_proposal();
  try {
    s.accept_proposal(t);
    FAIL();
  } catch (const Rejected& e) {
    EXPECT_EQ(e.reason(), "untested");
  }
  s.test_proposal(t);
  s.accept_proposal(t);

  auto dup = ttest_proposal();
  dup.trigger_index = 1;
  s.test_proposal(dup);
  try {
    s.accept_proposal(dup);
    FAIL();
  } catch (const Rejected& e) {
    EXPECT_EQ(e.reason(), "duplicate_id");
  }

  // Covers nothing the trigger still lacks.
  auto idle = negative_proposal("idle", R"(zz\d+)", "d1", 0);
  s.test_proposal(idle);
  try {
    s.accept_proposal(idle);
    FAIL();
  } catch (const Rejected& e) {
    EXPECT_EQ(e.reason(), "no_progress");
  }
  EXPECT_EQ(s.metrics().version, 1);
}

TEST(Session, CompileErrorIsADiagnosticWithPosition) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  auto bad = negative_proposal("bad", "(", "d1", 0);
  auto report = s.test_proposal(bad);
  ASSERT_TRUE(report.diagnostic);
  EXPECT_GE(report.diagnostic->position, 0);
  EXPECT_THROW(s.accept_proposal(bad), Rejected);  // never passed a dry run

  auto missing_sub = ttest_proposal();
  missing_sub.positive.sub_rules.pop_back();
  EXPECT_TRUE(s.test_proposal(missing_sub).diagnostic);
}

TEST(Session, OvergeneralNegativeRuleIsFlaggedOnFixtures) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  auto t = ttest_proposal();
  s.test_proposal(t);
  s.accept_proposal(t);
  // A rule matching inside the stored t-test fragment.
  auto greedy = negative_proposal("greedy", R"(\d+)", "d1", 0);
  auto report = s.test_proposal(greedy);
  ASSERT_FALSE(report.diffs.empty());
  bool overlap = false;
  for (const auto& d : report.diffs) overlap = overlap || d.kind == "fragment_overlap";
  EXPECT_TRUE(overlap);
  EXPECT_EQ(report.blocking_diffs(), 0u);
}

TEST(Session, SkipAdvancesAndEndSignal) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  for (int i = 0; i < 4; ++i) {
    auto item = s.next_unclassified();
    ASSERT_TRUE(item);
    s.skip(item->sentence.doc_id, item->sentence.index);
  }
  EXPECT_FALSE(s.next_unclassified());
  EXPECT_TRUE(s.metrics().exhausted);
  EXPECT_THROW(s.skip("nope", 0), Rejected);
}

TEST(Session, ReloadAndReplayReproduceRulesAndVerdicts) {
  testing::TempDir dir;
  std::vector<std::string> verdicts;
  {
    Session s(candidates(), dir.path(), {}, small_options());
    auto t = ttest_proposal();
    s.test_proposal(t);
    s.accept_proposal(t);
    auto neg = negative_proposal("wnw", R"([a-zA-Z]+\s\d+\s[a-zA-Z]+)", "d1", 0);
    s.test_proposal(neg);
    s.accept_proposal(neg);
    for (const auto& c : candidates()) {
      verdicts.push_back(to_json(rules::classify_sentence(c.text, *s.compiled(), c.doc_id, c.index)).dump());
    }
  }
  auto on_disk = read_file(dir / "rulesets.json");
  auto replayed = Session::replay(dir / "audit.jsonl");
  EXPECT_EQ(rules::serialize(replayed), on_disk);

  Session reopened(candidates(), dir.path(), {}, small_options());
  EXPECT_EQ(rules::serialize(reopened.rulesets()), on_disk);
  EXPECT_EQ(reopened.fixtures().size(), 1u);
  std::size_t i = 0;
  for (const auto& c : candidates()) {
    EXPECT_EQ(to_json(rules::classify_sentence(c.text, *reopened.compiled(), c.doc_id, c.index)).dump(),
              verdicts[i++]);
  }
}

TEST(Session, ConcurrentAcceptsAreSerialisedWithoutVersionGaps) {
  testing::TempDir dir;
  Session s(candidates(), dir.path(), {}, small_options());
  std::vector<RuleProposal> props;
  for (int i = 0; i < 8; ++i) {
    // Each rule covers the "400" in a different way; only the first accepted
    // one makes progress, later ones are rejected.
    props.push_back(negative_proposal("n" + std::to_string(i), "ibuprofen " + std::string(i, ' ') + "?\\d+", "d1", 0));
    s.test_proposal(props.back());
  }
  std::vector<std::thread> pool;
  std::atomic<int> accepted{0};
  for (auto& p : props) {
    pool.emplace_back([&, p] {
      try {
        s.accept_proposal(p);
        ++accepted;
      } catch (const Rejected&) {
      }
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(accepted.load(), 1);
  EXPECT_EQ(s.metrics().version, 1);
  auto replayed = Session::replay(dir / "audit.jsonl");
  EXPECT_EQ(replayed.version, 1);
}

TEST(Session, StarterPackCoverageOnFixtureCorpus) {
  testing::TempDir dir;
  Session::Options o;
  o.heldout_size = 1000;
  Session s(testing::data_path("corpus"), dir.path(), rules::starter_rulesets(), o);
  auto m = s.metrics();
  EXPECT_GE(m.heldout.coverage(), 0.95);
}

TEST(Proposal, JsonRoundTrip) {
  auto p = ttest_proposal();
  auto back = proposal_from_json(to_json(p));
  EXPECT_EQ(to_json(back), to_json(p));
  EXPECT_THROW(proposal_from_json(nlohmann::json::parse(R"({"target_set": "x"})")), ParseError);
}

}  // namespace
}  // namespace stereo::session
