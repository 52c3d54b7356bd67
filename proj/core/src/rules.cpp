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

#include "stereo/rules.hpp"

#include <algorithm>

#include <boost/regex.hpp>

#include "stereo/error.hpp"
#include "stereo/regex_dialect.hpp"

namespace stereo::rules {

struct CompiledRules::Impl {
  struct Sub {
    Param param;
    std::string name;
    boost::regex re;
  };
  struct Positive {
    const PositiveRule* rule;
    std::string type_group;
    boost::regex re;
    std::vector<Sub> subs;
  };
  struct Negative {
    const NegativeRule* rule;
    boost::regex re;
  };
  std::vector<Positive> positive;
  std::vector<Negative> negative;
};

namespace {

boost::regex compile(const std::string& pattern) {
  boost::regex re;
  RegexDiagnostic diag;
  compile_pattern(pattern, re, diag);  // already validated
  return re;
}

}  // namespace

CompiledRules::CompiledRules(RuleSets source) : source_(std::move(source)), impl_(std::make_unique<Impl>()) {
  std::set<std::string> ids;
  auto check_id = [&](const std::string& id) {
    if (!ids.insert(id).second) throw RuleError("duplicate rule_id '" + id + "'", id);
  };
  for (const auto& r : source_.positive) {
    check_id(r.rule_id);
    validate(r);
    Impl::Positive p{&r, std::string(to_string(r.stat_type)), compile(r.pattern), {}};
    for (const auto& s : r.sub_rules) {
      p.subs.push_back({s.param, std::string(to_string(s.param)), compile(s.pattern)});
    }
    impl_->positive.push_back(std::move(p));
  }
  for (const auto& r : source_.negative) {
    check_id(r.rule_id);
    validate(r);
    impl_->negative.push_back({&r, compile(r.pattern)});
  }
}

CompiledRules::~CompiledRules() = default;
CompiledRules::CompiledRules(CompiledRules&&) noexcept = default;
CompiledRules& CompiledRules::operator=(CompiledRules&&) noexcept = default;

Residual::Residual(std::string_view sentence) : original_(sentence), text_(sentence) {}

void Residual::cover(Span span) {
  for (std::size_t i = span.start; i < span.end && i < text_.size(); ++i) text_[i] = kMask;
}

bool Residual::any_covered(Span span) const {
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (text_[i] == kMask) return true;
  }
  return false;
}

std::size_t Residual::uncovered_digits() const {
  return static_cast<std::size_t>(std::count_if(text_.begin(), text_.end(), is_digit));
}

namespace {

StatisticRecord build_record(const CompiledRules::Impl::Positive& p, const std::string& sentence, Span span) {
  StatisticRecord rec;
  rec.stat_type = p.rule->stat_type;
  rec.rule_id = p.rule->rule_id;
  rec.span = span;
  rec.fragment = sentence.substr(span.start, span.size());
  for (const auto& sub : p.subs) {
    if (rec.params.count(sub.param)) continue;
    boost::smatch m;
    if (!boost::regex_search(rec.fragment, m, sub.re)) continue;
    const auto& g = m[sub.name];
    if (!g.matched) continue;
    auto value = parse_number(g.str());
    if (value) {
      rec.params[sub.param] = *value;
    } else {
      rec.warnings.push_back(sub.name + ": unparseable value '" + g.str() + "'");
    }
  }
  for (Param req : required_params(rec.stat_type)) {
    if (!rec.params.count(req)) rec.missing_params.insert(req);
  }
  rec.apa_conform = p.rule->apa_template && classify_apa(rec, rec.fragment);
  return rec;
}

}  // namespace

std::optional<StatisticRecord> apply_positive(Residual& residual, const CompiledRules& rules) {
  const std::string& text = residual.text();
  if (residual.uncovered_digits() == 0) return std::nullopt;
  for (const auto& p : rules.impl().positive) {
    auto begin = text.cbegin();
    while (begin <= text.cend()) {
      boost::smatch m;
      auto flags = begin == text.cbegin() ? boost::match_default : boost::match_default | boost::match_prev_avail;
      if (!boost::regex_search(begin, text.cend(), m, p.re, flags)) break;
      const auto& g = m[p.type_group].matched ? m[p.type_group] : m[0];
      Span span{static_cast<std::size_t>(g.first - text.cbegin()), static_cast<std::size_t>(g.second - text.cbegin())};
      bool usable = !span.empty() && !residual.any_covered(span) &&
                    contains_digit(std::string_view(text).substr(span.start, span.size()));
      if (usable) {
        auto rec = build_record(p, residual.original(), span);
        residual.cover(span);
        return rec;
      }
      // Retry from the next byte so an overlapping later match is not lost.
      if (m[0].first == text.cend()) break;
      begin = m[0].first + 1;
    }
  }
  return std::nullopt;
}

std::vector<Span> apply_negative(Residual& residual, const CompiledRules& rules) {
  std::vector<Span> covered;
  for (const auto& n : rules.impl().negative) {
    if (residual.uncovered_digits() == 0) break;
    const std::string& text = residual.text();
    std::vector<Span> hits;
    boost::sregex_iterator it(text.cbegin(), text.cend(), n.re), end;
    for (; it != end; ++it) {
      auto start = static_cast<std::size_t>((*it)[0].first - text.cbegin());
      auto stop = static_cast<std::size_t>((*it)[0].second - text.cbegin());
      for (const Span& run : digit_runs(std::string_view(text).substr(start, stop - start))) {
        hits.push_back({start + run.start, start + run.end});
      }
    }
    for (const Span& h : hits) {
      residual.cover(h);
      covered.push_back(h);
    }
  }
  return covered;
}

SentenceVerdict classify_sentence(std::string_view sentence, const CompiledRules& rules, std::string_view doc_id,
                                  std::size_t sentence_index) {
  SentenceVerdict v;
  Residual residual(sentence);
  while (residual.uncovered_digits() > 0) {
    while (auto rec = apply_positive(residual, rules)) {
      rec->doc_id = std::string(doc_id);
      rec->sentence_index = sentence_index;
      v.records.push_back(std::move(*rec));
    }
    if (residual.uncovered_digits() == 0) break;
    auto covered = apply_negative(residual, rules);
    if (covered.empty()) break;
    v.negative_spans.insert(v.negative_spans.end(), covered.begin(), covered.end());
  }
  std::sort(v.records.begin(), v.records.end(),
            [](const StatisticRecord& a, const StatisticRecord& b) { return a.span < b.span; });
  std::sort(v.negative_spans.begin(), v.negative_spans.end());
  v.uncovered_digit_spans = residual.uncovered_digit_spans();
  v.status = v.uncovered_digit_spans.empty() ? Status::all_covered : Status::has_unclassified;
  return v;
}

}  // namespace stereo::rules
