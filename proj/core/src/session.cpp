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

#include "stereo/session.hpp"

#include <algorithm>
#include <sstream>

#include <boost/regex.hpp>

#include "stereo/sampling.hpp"

namespace stereo::session {

using rules::CompiledRules;
using rules::RuleSets;
using rules::SentenceVerdict;
using rules::Status;

namespace {

nlohmann::json spans_json(const std::vector<Span>& spans) {
  nlohmann::json out = nlohmann::json::array();
  for (const Span& s : spans) out.push_back({{"start", s.start}, {"end", s.end}});
  return out;
}

std::vector<Span> spans_from_json(const nlohmann::json& j) {
  std::vector<Span> out;
  for (const auto& s : j) out.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
  return out;
}

std::vector<Span> raw_matches(const std::string& pattern, const std::string& text) {
  boost::regex re;
  RegexDiagnostic diag;
  std::vector<Span> out;
  if (!compile_pattern(pattern, re, diag)) return out;
  for (boost::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
    auto start = static_cast<std::size_t>(it->position());
    out.push_back({start, start + static_cast<std::size_t>(it->length())});
  }
  return out;
}

bool same_record(const rules::StatisticRecord& a, const rules::StatisticRecord& b) {
  return a.stat_type == b.stat_type && a.span == b.span && a.params == b.params;
}

void append_rule(RuleSets& rs, const RuleProposal& p) {
  if (p.target == TargetSet::positive) {
    rs.positive.push_back(p.positive);
  } else {
    rs.negative.push_back(p.negative);
  }
  rs.version += 1;
}

}  // namespace

nlohmann::json to_json(const RuleProposal& p) {
  nlohmann::json reported = nlohmann::json::array();
  for (auto param : p.reported_params) reported.push_back(std::string(rules::to_string(param)));
  return {{"target_set", p.target == TargetSet::positive ? "positive" : "negative"},
          {"rule", p.target == TargetSet::positive ? rules::to_json(p.positive) : rules::to_json(p.negative)},
          {"reported_params", reported},
          {"trigger", {{"doc_id", p.trigger_doc_id}, {"index", p.trigger_index}}}};
}

RuleProposal proposal_from_json(const nlohmann::json& j) {
  try {
    RuleProposal p;
    auto target = j.at("target_set").get<std::string>();
    if (target == "positive") {
      p.target = TargetSet::positive;
      p.positive = rules::positive_rule_from_json(j.at("rule"));
    } else if (target == "negative") {
      p.target = TargetSet::negative;
      p.negative = rules::negative_rule_from_json(j.at("rule"));
    } else {
      throw ParseError("target_set must be 'positive' or 'negative'");
    }
    if (j.contains("reported_params")) {
      for (const auto& r : j["reported_params"]) {
        auto param = rules::param_from_string(r.get<std::string>());
        if (!param) throw ParseError("unknown reported param '" + r.get<std::string>() + "'");
        p.reported_params.push_back(*param);
      }
    }
    p.trigger_doc_id = j.at("trigger").at("doc_id").get<std::string>();
    p.trigger_index = j.at("trigger").at("index").get<std::size_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad rule proposal: ") + e.what());
  }
}

nlohmann::json to_json(const SentenceVerdict& v) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : v.records) {
    auto j = rules::to_json(r, "");
    j.erase("sentence_text");
    recs.push_back(std::move(j));
  }
  return {{"status", std::string(rules::to_string(v.status))},
          {"records", recs},
          {"negative_spans", spans_json(v.negative_spans)},
          {"uncovered", spans_json(v.uncovered_digit_spans)}};
}

SentenceVerdict verdict_from_json(const nlohmann::json& j) {
  SentenceVerdict v;
  v.status = j.at("status").get<std::string>() == "all_covered" ? Status::all_covered : Status::has_unclassified;
  for (const auto& r : j.at("records")) v.records.push_back(rules::record_from_json(r));
  v.negative_spans = spans_from_json(j.at("negative_spans"));
  v.uncovered_digit_spans = spans_from_json(j.at("uncovered"));
  return v;
}

std::size_t TestReport::uncovered_chars(const std::vector<Span>& spans) {
  std::size_t n = 0;
  for (const Span& s : spans) n += s.size();
  return n;
}

std::size_t TestReport::blocking_diffs() const {
  return static_cast<std::size_t>(
      std::count_if(diffs.begin(), diffs.end(), [](const FixtureDiff& d) { return d.kind != "fragment_overlap"; }));
}

nlohmann::json to_json(const TestReport& r) {
  nlohmann::json diffs = nlohmann::json::array();
  for (const auto& d : r.diffs) {
    diffs.push_back({{"doc_id", d.doc_id}, {"index", d.index}, {"kind", d.kind}, {"detail", d.detail}});
  }
  nlohmann::json diag = nullptr;
  if (r.diagnostic) diag = {{"message", r.diagnostic->message}, {"position", r.diagnostic->position}};
  return {{"valid", !r.diagnostic.has_value()},
          {"diagnostic", diag},
          {"trigger",
           {{"matches", spans_json(r.trigger_matches)},
            {"uncovered_before", spans_json(r.trigger_uncovered_before)},
            {"uncovered_after", spans_json(r.trigger_uncovered_after)},
            {"progress", r.progress()}}},
          {"regression", {{"fixtures_checked", r.fixtures_checked}, {"diffs", diffs}, {"blocking", r.blocking_diffs()}}},
          {"sample", {{"size", r.sample_size}, {"matches", r.sample_matches}, {"newly_covered", r.sample_newly_covered}}}};
}

nlohmann::json to_json(const Metrics& m) {
  auto cov = [](const CoverageStat& c) {
    return nlohmann::json{{"sentences", c.sentences}, {"covered", c.covered}, {"coverage", c.coverage()}};
  };
  return {{"version", m.version},
          {"rules", {{"positive", m.positive_rules}, {"negative", m.negative_rules}}},
          {"fixtures", m.fixtures},
          {"candidates", m.candidates},
          {"cursor", m.cursor},
          {"exhausted", m.exhausted},
          {"training", cov(m.training)},
          {"heldout", cov(m.heldout)}};
}

Session::Session(const std::filesystem::path& corpus_dir, const std::filesystem::path& dir,
                 const RuleSets& initial, Options options)
    : dir_(dir), options_(options) {
  ingest::IngestReport report;
  candidates_ = ingest::ingest_corpus(corpus_dir, {false, options_.threads}, report);
  open_or_create(initial);
}

Session::Session(std::vector<ingest::Sentence> candidates, const std::filesystem::path& dir,
                 const RuleSets& initial, Options options)
    : dir_(dir), options_(options), candidates_(std::move(candidates)) {
  open_or_create(initial);
}

void Session::open_or_create(const RuleSets& initial) {
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    by_ref_.emplace(std::make_pair(candidates_[i].doc_id, candidates_[i].index), i);
  }
  sample_ = sample_indices(candidates_.size(), options_.sample_size, options_.seed);
  std::filesystem::create_directories(dir_);
  auto audit = dir_ / "audit.jsonl";

  if (std::filesystem::exists(audit) && std::filesystem::file_size(audit) > 0) {
    std::istringstream in(read_file(audit));
    std::string line;
    bool initialised = false;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto ev = nlohmann::json::parse(line);
      auto kind = ev.at("event").get<std::string>();
      if (kind == "init") {
        rules_ = rules::rulesets_from_json(ev.at("rulesets"));
        initialised = true;
      } else if (kind == "accept") {
        if (!initialised) throw ParseError("audit log: accept before init");
        auto p = proposal_from_json(ev.at("proposal"));
        append_rule(rules_, p);
        if (rules_.version != ev.at("version").get<long>()) throw ParseError("audit log: version gap");
        // Fixtures are rebuilt from the recorded triggers.
        if (const auto* s = find(p.trigger_doc_id, p.trigger_index)) {
          CompiledRules at_version(rules_);
          Fixture f{s->doc_id, s->index, s->text, rules::classify_sentence(s->text, at_version, s->doc_id, s->index)};
          auto it = std::find_if(fixtures_.begin(), fixtures_.end(),
                                 [&](const Fixture& x) { return x.doc_id == f.doc_id && x.index == f.index; });
          if (it != fixtures_.end()) {
            *it = std::move(f);
          } else {
            fixtures_.push_back(std::move(f));
          }
        }
      } else if (kind == "skip") {
        skipped_.emplace(ev.at("doc_id").get<std::string>(), ev.at("index").get<std::size_t>());
      }
      audit_seq_ = ev.at("seq").get<std::size_t>() + 1;
    }
    if (!initialised) throw ParseError("audit log without init event");
  } else {
    rules_ = initial;
    nlohmann::json ev{{"seq", 0}, {"event", "init"}, {"rulesets", rules::to_json(rules_)}};
    append_line(audit, ev.dump());
    audit_seq_ = 1;
  }
  compiled_ = std::make_shared<const CompiledRules>(rules_);
  rules::save_rulesets(dir_ / "rulesets.json", rules_);
  write_fixtures();
}

const ingest::Sentence* Session::find(const std::string& doc_id, std::size_t index) const {
  auto it = by_ref_.find({doc_id, index});
  return it == by_ref_.end() ? nullptr : &candidates_[it->second];
}

void Session::write_fixtures() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fixtures_) {
    arr.push_back({{"doc_id", f.doc_id}, {"index", f.index}, {"text", f.text}, {"verdict", to_json(f.verdict)}});
  }
  write_file(dir_ / "fixtures.json", arr.dump(2) + "\n");
}

std::optional<UnclassifiedItem> Session::next_unclassified() {
  std::lock_guard lock(mu_);
  while (cursor_ < candidates_.size()) {
    const auto& s = candidates_[cursor_];
    if (!skipped_.count({s.doc_id, s.index})) {
      auto v = rules::classify_sentence(s.text, *compiled_, s.doc_id, s.index);
      if (v.status == Status::has_unclassified) return UnclassifiedItem{s, v.uncovered_digit_spans};
    }
    ++cursor_;
  }
  return std::nullopt;
}

TestReport Session::run_test(const RuleProposal& proposal, RuleSets& candidate_rules,
                             std::shared_ptr<CompiledRules>& compiled) {
  const auto* trigger = find(proposal.trigger_doc_id, proposal.trigger_index);
  if (trigger == nullptr) {
    throw InvalidProposal("unknown trigger sentence " + proposal.trigger_doc_id + "#" +
                              std::to_string(proposal.trigger_index),
                          {});
  }
  TestReport report;
  if (proposal.target == TargetSet::positive) {
    for (auto param : proposal.reported_params) {
      const auto& subs = proposal.positive.sub_rules;
      bool has = std::any_of(subs.begin(), subs.end(), [&](const rules::SubRule& s) { return s.param == param; });
      if (!has) {
        report.diagnostic = RegexDiagnostic{"reported parameter '" + std::string(rules::to_string(param)) +
                                                "' has no sub-rule",
                                            -1};
        return report;
      }
    }
  }
  candidate_rules = rules_;
  append_rule(candidate_rules, proposal);
  try {
    compiled = std::make_shared<CompiledRules>(candidate_rules);
  } catch (const RuleError& e) {
    report.diagnostic = RegexDiagnostic{e.what(), e.position()};
    return report;
  }

  report.trigger_matches = raw_matches(proposal.pattern(), trigger->text);
  report.trigger_uncovered_before = rules::classify_sentence(trigger->text, *compiled_).uncovered_digit_spans;
  report.trigger_uncovered_after = rules::classify_sentence(trigger->text, *compiled).uncovered_digit_spans;

  for (const auto& f : fixtures_) {
    ++report.fixtures_checked;
    auto nv = rules::classify_sentence(f.text, *compiled, f.doc_id, f.index);
    if (f.verdict.status == Status::all_covered && nv.status != Status::all_covered) {
      report.diffs.push_back({f.doc_id, f.index, "coverage_lost",
                              std::to_string(nv.uncovered_digit_spans.size()) + " digit span(s) uncovered"});
    }
    for (const auto& old : f.verdict.records) {
      bool kept = std::any_of(nv.records.begin(), nv.records.end(),
                              [&](const rules::StatisticRecord& r) { return same_record(old, r); });
      if (!kept) {
        report.diffs.push_back({f.doc_id, f.index, "records_changed",
                                std::string(rules::to_string(old.stat_type)) + " record '" + old.fragment + "' lost"});
      }
    }
    if (proposal.target == TargetSet::negative) {
      for (const Span& m : raw_matches(proposal.pattern(), f.text)) {
        for (const auto& old : f.verdict.records) {
          if (m.overlaps(old.span) && contains_digit(std::string_view(f.text).substr(m.start, m.size()))) {
            report.diffs.push_back({f.doc_id, f.index, "fragment_overlap",
                                    "matches '" + f.text.substr(m.start, m.size()) + "' inside statistic '" +
                                        old.fragment + "'"});
          }
        }
      }
    }
  }

  report.sample_size = sample_.size();
  for (std::size_t idx : sample_) {
    const auto& s = candidates_[idx];
    if (!raw_matches(proposal.pattern(), s.text).empty()) ++report.sample_matches;
    auto before = rules::classify_sentence(s.text, *compiled_).status;
    if (before == Status::has_unclassified &&
        rules::classify_sentence(s.text, *compiled).status == Status::all_covered) {
      ++report.sample_newly_covered;
    }
  }
  return report;
}

TestReport Session::test_proposal(const RuleProposal& proposal) {
  std::lock_guard lock(mu_);
  RuleSets candidate;
  std::shared_ptr<CompiledRules> compiled;
  auto report = run_test(proposal, candidate, compiled);
  if (!report.diagnostic) tested_.insert(to_json(proposal).dump());
  return report;
}

long Session::accept_proposal(const RuleProposal& proposal) {
  std::lock_guard lock(mu_);
  const auto& id = proposal.rule_id();
  bool duplicate =
      std::any_of(rules_.positive.begin(), rules_.positive.end(), [&](const auto& r) { return r.rule_id == id; }) ||
      std::any_of(rules_.negative.begin(), rules_.negative.end(), [&](const auto& r) { return r.rule_id == id; });
  if (duplicate) throw Rejected("rule_id '" + id + "' already exists", "duplicate_id");
  if (!tested_.count(to_json(proposal).dump())) {
    throw Rejected("proposal must be tested before it is accepted", "untested");
  }

  RuleSets candidate;
  std::shared_ptr<CompiledRules> compiled;
  auto report = run_test(proposal, candidate, compiled);
  if (report.diagnostic) throw InvalidProposal(report.diagnostic->message, *report.diagnostic);
  if (!report.progress()) {
    throw Rejected("rule does not cover any uncovered digit of its trigger sentence", "no_progress");
  }
  if (report.blocking_diffs() > 0) {
    throw Rejected(std::to_string(report.blocking_diffs()) + " regression diff(s) on stored fixtures", "regression");
  }

  nlohmann::json ev{{"seq", audit_seq_}, {"event", "accept"}, {"version", candidate.version},
                    {"proposal", to_json(proposal)}};
  append_line(dir_ / "audit.jsonl", ev.dump());
  ++audit_seq_;
  rules_ = std::move(candidate);
  compiled_ = std::move(compiled);

  const auto* s = find(proposal.trigger_doc_id, proposal.trigger_index);
  Fixture f{s->doc_id, s->index, s->text, rules::classify_sentence(s->text, *compiled_, s->doc_id, s->index)};
  auto it = std::find_if(fixtures_.begin(), fixtures_.end(),
                         [&](const Fixture& x) { return x.doc_id == f.doc_id && x.index == f.index; });
  if (it != fixtures_.end()) {
    *it = std::move(f);
  } else {
    fixtures_.push_back(std::move(f));
  }
  rules::save_rulesets(dir_ / "rulesets.json", rules_);
  write_fixtures();
  return rules_.version;
}

void Session::skip(const std::string& doc_id, std::size_t index) {
  std::lock_guard lock(mu_);
  if (find(doc_id, index) == nullptr) throw Rejected("unknown sentence " + doc_id + "#" + std::to_string(index), "unknown");
  if (!skipped_.emplace(doc_id, index).second) return;
  nlohmann::json ev{{"seq", audit_seq_}, {"event", "skip"}, {"doc_id", doc_id}, {"index", index}};
  append_line(dir_ / "audit.jsonl", ev.dump());
  ++audit_seq_;
}

std::vector<std::size_t> Session::heldout_indices() const {
  // Unseen material: documents after the one holding the cursor.
  std::size_t start = cursor_;
  if (start < candidates_.size()) {
    const auto& doc = candidates_[start].doc_id;
    while (start < candidates_.size() && candidates_[start].doc_id == doc) ++start;
  }
  auto picked = sample_indices(candidates_.size() - start, options_.heldout_size, options_.seed);
  for (auto& i : picked) i += start;
  return picked;
}

Metrics Session::metrics() {
  std::lock_guard lock(mu_);
  Metrics m;
  m.version = rules_.version;
  m.positive_rules = rules_.positive.size();
  m.negative_rules = rules_.negative.size();
  m.fixtures = fixtures_.size();
  m.candidates = candidates_.size();
  m.cursor = cursor_;
  m.exhausted = cursor_ >= candidates_.size();
  auto heldout = heldout_indices();
  // Training slice: every candidate of the documents up to the cursor.
  std::size_t train_end = cursor_;
  if (train_end < candidates_.size()) {
    const auto& doc = candidates_[train_end].doc_id;
    while (train_end < candidates_.size() && candidates_[train_end].doc_id == doc) ++train_end;
  }
  for (std::size_t i = 0; i < train_end; ++i) {
    ++m.training.sentences;
    if (rules::classify_sentence(candidates_[i].text, *compiled_).status == Status::all_covered) ++m.training.covered;
  }
  for (std::size_t i : heldout) {
    ++m.heldout.sentences;
    if (rules::classify_sentence(candidates_[i].text, *compiled_).status == Status::all_covered) ++m.heldout.covered;
  }
  return m;
}

RuleSets Session::rulesets() {
  std::lock_guard lock(mu_);
  return rules_;
}

std::shared_ptr<const CompiledRules> Session::compiled() {
  std::lock_guard lock(mu_);
  return compiled_;
}

std::vector<Fixture> Session::fixtures() {
  std::lock_guard lock(mu_);
  return fixtures_;
}

RuleSets Session::replay(const std::filesystem::path& audit_log) {
  std::istringstream in(read_file(audit_log));
  std::string line;
  RuleSets rs;
  bool initialised = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto ev = nlohmann::json::parse(line);
    auto kind = ev.at("event").get<std::string>();
    if (kind == "init") {
      rs = rules::rulesets_from_json(ev.at("rulesets"));
      initialised = true;
    } else if (kind == "accept") {
      append_rule(rs, proposal_from_json(ev.at("proposal")));
    }
  }
  if (!initialised) throw ParseError("audit log without init event");
  return rs;
}

}  // namespace stereo::session
