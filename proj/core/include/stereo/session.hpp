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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereo/error.hpp"
#include "stereo/ingest.hpp"
#include "stereo/regex_dialect.hpp"
#include "stereo/rules.hpp"

namespace stereo::session {

enum class TargetSet { positive, negative };

struct RuleProposal {
  TargetSet target = TargetSet::negative;
  rules::PositiveRule positive;  // used when target == positive
  rules::NegativeRule negative;  // used when target == negative
  // Parameters the author says the trigger reports; each needs a sub-rule.
  std::vector<rules::Param> reported_params;
  std::string trigger_doc_id;
  std::size_t trigger_index = 0;

  const std::string& rule_id() const { return target == TargetSet::positive ? positive.rule_id : negative.rule_id; }
  const std::string& pattern() const { return target == TargetSet::positive ? positive.pattern : negative.pattern; }
};

// {"target_set", "rule": {...}, "reported_params": [...], "trigger": {"doc_id", "index"}}
nlohmann::json to_json(const RuleProposal& p);
RuleProposal proposal_from_json(const nlohmann::json& j);

struct UnclassifiedItem {
  ingest::Sentence sentence;
  std::vector<Span> uncovered;
};

// Expected verdict of a sentence, stored for regression testing.
struct Fixture {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  rules::SentenceVerdict verdict;
};

struct FixtureDiff {
  std::string doc_id;
  std::size_t index = 0;
  // coverage_lost | records_changed | fragment_overlap
  std::string kind;
  std::string detail;
};

struct TestReport {
  std::optional<RegexDiagnostic> diagnostic;  // set when the rule is invalid
  std::vector<Span> trigger_matches;          // raw pattern matches on the trigger
  std::vector<Span> trigger_uncovered_before;
  std::vector<Span> trigger_uncovered_after;
  std::vector<FixtureDiff> diffs;
  std::size_t fixtures_checked = 0;
  std::size_t sample_size = 0;
  std::size_t sample_matches = 0;      // sample sentences the pattern matches
  std::size_t sample_newly_covered = 0;  // sample sentences that become all_covered

  // The rule covers at least one more digit of its trigger sentence.
  bool progress() const {
    return uncovered_chars(trigger_uncovered_after) < uncovered_chars(trigger_uncovered_before);
  }
  // Diffs that block acceptance (fragment overlaps are advisory).
  std::size_t blocking_diffs() const;

  static std::size_t uncovered_chars(const std::vector<Span>& spans);
};

nlohmann::json to_json(const TestReport& r);

struct CoverageStat {
  std::size_t sentences = 0;
  std::size_t covered = 0;
  double coverage() const { return sentences == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(sentences); }
};

struct Metrics {
  long version = 0;
  std::size_t positive_rules = 0;
  std::size_t negative_rules = 0;
  std::size_t fixtures = 0;
  std::size_t candidates = 0;
  std::size_t cursor = 0;  // candidate sentences already passed
  bool exhausted = false;
  CoverageStat training;
  CoverageStat heldout;
};

nlohmann::json to_json(const Metrics& m);

// Raised when a proposal cannot be accepted (HTTP 409).
class Rejected : public Error {
 public:
  Rejected(const std::string& what, std::string reason) : Error(what), reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

// A rule proposal that fails validation (HTTP 400).
class InvalidProposal : public Error {
 public:
  InvalidProposal(const std::string& what, RegexDiagnostic diag) : Error(what), diag_(std::move(diag)) {}
  const RegexDiagnostic& diagnostic() const { return diag_; }

 private:
  RegexDiagnostic diag_;
};

// Persistent active-learning session. The session directory holds
// rulesets.json (current rules), audit.jsonl (append-only event log, the
// source of truth) and fixtures.json (regression fixtures). All public
// methods are serialised by an internal mutex.
class Session {
 public:
  struct Options {
    std::size_t heldout_size = 200;
    std::size_t sample_size = 500;
    std::uint64_t seed = 42;
    unsigned threads = 1;
  };

  // Opens the session in `dir`, creating it from `initial` when the
  // directory holds no audit log. An existing log is replayed and
  // `initial` is ignored.
  Session(const std::filesystem::path& corpus_dir, const std::filesystem::path& dir,
          const rules::RuleSets& initial, Options options);
  // Same, over an in-memory candidate list (document order).
  Session(std::vector<ingest::Sentence> candidates, const std::filesystem::path& dir,
          const rules::RuleSets& initial, Options options);

  // Earliest unclassified sentence at or after the cursor; nullopt at the
  // end of the corpus.
  std::optional<UnclassifiedItem> next_unclassified();
  TestReport test_proposal(const RuleProposal& proposal);
  // Returns the new rule-set version.
  long accept_proposal(const RuleProposal& proposal);
  // Marks a sentence as deliberately left unclassified.
  void skip(const std::string& doc_id, std::size_t index);
  Metrics metrics();

  rules::RuleSets rulesets();
  std::shared_ptr<const rules::CompiledRules> compiled();
  std::vector<Fixture> fixtures();
  const std::filesystem::path& directory() const { return dir_; }

  // Rebuilds the rule sets recorded in an audit log.
  static rules::RuleSets replay(const std::filesystem::path& audit_log);

 private:
  void open_or_create(const rules::RuleSets& initial);
  const ingest::Sentence* find(const std::string& doc_id, std::size_t index) const;
  TestReport run_test(const RuleProposal& proposal, rules::RuleSets& candidate_rules,
                      std::shared_ptr<rules::CompiledRules>& compiled);
  void write_fixtures() const;
  std::vector<std::size_t> heldout_indices() const;

  std::filesystem::path dir_;
  Options options_;
  std::vector<ingest::Sentence> candidates_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> by_ref_;
  std::vector<std::size_t> sample_;  // indices for corpus-impact estimates

  std::mutex mu_;
  rules::RuleSets rules_;
  std::shared_ptr<const rules::CompiledRules> compiled_;
  std::vector<Fixture> fixtures_;
  std::set<std::pair<std::string, std::size_t>> skipped_;
  std::set<std::string> tested_;  // serialised proposals that passed a dry run
  std::size_t cursor_ = 0;
  std::size_t audit_seq_ = 0;
};

nlohmann::json to_json(const rules::SentenceVerdict& v);
rules::SentenceVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace stereo::session
