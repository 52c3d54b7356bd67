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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereo/text.hpp"

namespace stereo::rules {

enum class StatType { ttest, pearson, spearman, anova, mann_whitney_u, wilcoxon, chi_square, other, p_only };
enum class Param { doF, statisticVal, pval, effect_r, N, U, z, fval, rs, chi2, V };

inline constexpr StatType kAllStatTypes[] = {
    StatType::ttest,    StatType::pearson,    StatType::spearman, StatType::anova,  StatType::mann_whitney_u,
    StatType::wilcoxon, StatType::chi_square, StatType::other,    StatType::p_only};
inline constexpr Param kAllParams[] = {Param::doF, Param::statisticVal, Param::pval, Param::effect_r,
                                       Param::N,   Param::U,            Param::z,    Param::fval,
                                       Param::rs,  Param::chi2,         Param::V};

std::string_view to_string(StatType t);
std::string_view to_string(Param p);
std::optional<StatType> stat_type_from_string(std::string_view s);
std::optional<Param> param_from_string(std::string_view s);

// Parameters whose absence puts a record into missing_params.
const std::vector<Param>& required_params(StatType t);
// Every parameter a record of this type may carry (superset of required).
const std::vector<Param>& param_universe(StatType t);
bool in_universe(StatType t, Param p);

struct SubRule {
  Param param = Param::pval;
  std::string pattern;
};

struct PositiveRule {
  std::string rule_id;
  StatType stat_type = StatType::other;
  std::string pattern;
  std::vector<SubRule> sub_rules;
  bool apa_template = false;
};

struct NegativeRule {
  std::string rule_id;
  std::string pattern;
};

// Source form of both rule sets. Patterns are kept verbatim.
struct RuleSets {
  long version = 0;
  std::vector<PositiveRule> positive;
  std::vector<NegativeRule> negative;
};

nlohmann::json to_json(const RuleSets& rs);
nlohmann::json to_json(const PositiveRule& r);
nlohmann::json to_json(const NegativeRule& r);
RuleSets rulesets_from_json(const nlohmann::json& j);
PositiveRule positive_rule_from_json(const nlohmann::json& j);
NegativeRule negative_rule_from_json(const nlohmann::json& j);

// Canonical serialization (2-space indent, trailing newline).
std::string serialize(const RuleSets& rs);
RuleSets load_rulesets(const std::filesystem::path& path);
void save_rulesets(const std::filesystem::path& path, const RuleSets& rs);
// The bundled seed pack.
RuleSets starter_rulesets();

// Load-time validation. Throws RuleError naming the rule and, for compile
// failures, the offending offset in the pattern.
void validate(const PositiveRule& r);
void validate(const NegativeRule& r);

struct StatisticRecord {
  std::string doc_id;
  std::size_t sentence_index = 0;
  StatType stat_type = StatType::other;
  std::string rule_id;
  std::map<Param, double> params;
  Span span;  // byte range in the sentence
  std::string fragment;
  bool apa_conform = false;
  std::set<Param> missing_params;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const StatisticRecord& r, std::string_view sentence_text);
// Returns the record and fills `sentence_text` when the field is present.
StatisticRecord record_from_json(const nlohmann::json& j, std::string* sentence_text = nullptr);

class CompiledRules;

// Working copy of a sentence in which covered bytes are masked. Masking
// keeps byte offsets aligned with the original sentence.
class Residual {
 public:
  static constexpr char kMask = '\x1F';

  explicit Residual(std::string_view sentence);

  const std::string& original() const { return original_; }
  const std::string& text() const { return text_; }

  void cover(Span span);
  bool is_covered(std::size_t pos) const { return text_[pos] == kMask; }
  bool any_covered(Span span) const;

  std::vector<Span> uncovered_digit_spans() const { return digit_runs(text_); }
  std::size_t uncovered_digits() const;

 private:
  std::string original_;
  std::string text_;
};

// First positive rule (list order) with an acceptable match on the residual
// yields a record; its span is masked. Returns nullopt when no rule fires.
std::optional<StatisticRecord> apply_positive(Residual& residual, const CompiledRules& rules);

// Every negative rule marks the uncovered digit runs inside its matches as
// covered. Returns the newly covered spans in rule order.
std::vector<Span> apply_negative(Residual& residual, const CompiledRules& rules);

enum class Status { all_covered, has_unclassified };
std::string_view to_string(Status s);

struct SentenceVerdict {
  std::vector<StatisticRecord> records;
  std::vector<Span> negative_spans;
  std::vector<Span> uncovered_digit_spans;
  Status status = Status::all_covered;
};

SentenceVerdict classify_sentence(std::string_view sentence, const CompiledRules& rules,
                                  std::string_view doc_id = {}, std::size_t sentence_index = 0);

// True iff nothing required is missing and the fragment follows the
// reporting checklist for its type.
bool classify_apa(const StatisticRecord& record, std::string_view fragment);

// Immutable compiled form of a RuleSets; safe to share between threads.
class CompiledRules {
 public:
  // Throws RuleError on the first invalid rule.
  explicit CompiledRules(RuleSets source);
  ~CompiledRules();
  CompiledRules(CompiledRules&&) noexcept;
  CompiledRules& operator=(CompiledRules&&) noexcept;

  const RuleSets& source() const { return source_; }
  long version() const { return source_.version; }

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  RuleSets source_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stereo::rules
