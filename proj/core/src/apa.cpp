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

#include <boost/regex.hpp>

#include "stereo/rules.hpp"

namespace stereo::rules {
namespace {

struct Checklist {
  boost::regex symbol;
  // Some types additionally need a lowercase z.
  bool needs_z = false;
};

const Checklist* checklist(StatType t) {
  // Statistic symbol in the case APA prescribes, with parenthesised degrees
  // of freedom where the test has them.
  static const Checklist ttest{boost::regex(R"((?<![A-Za-z])t\s?\(\s?\d+(?:\.\d+)?\s?\)\s?=)"), false};
  static const Checklist pearson{boost::regex(R"((?<![A-Za-z])r\s?\(\s?\d+\s?\)\s?=)"), false};
  static const Checklist spearman{boost::regex(R"((?:(?<![A-Za-z])r[_ ]?s|ρ)\s?\(\s?\d+\s?\)\s?=)"), false};
  static const Checklist anova{boost::regex(R"((?<![A-Za-z])F\s?\(\s?\d+\s?,\s?\d+\s?\)\s?=)"), false};
  static const Checklist mwu{boost::regex(R"((?<![A-Za-z])U\s?=)"), true};
  static const Checklist wilcoxon{boost::regex(R"((?<![A-Za-z])[TW]\s?=)"), true};
  static const Checklist chi{boost::regex(R"((?:χ2|χ²|χ\^2)\s?\(\s?\d+\s?,\s?N\s?=\s?\d+\s?\)\s?=)"), false};
  switch (t) {
    case StatType::ttest: return &ttest;
    case StatType::pearson: return &pearson;
    case StatType::spearman: return &spearman;
    case StatType::anova: return &anova;
    case StatType::mann_whitney_u: return &mwu;
    case StatType::wilcoxon: return &wilcoxon;
    case StatType::chi_square: return &chi;
    default: return nullptr;
  }
}

// Every assignment after the first must be separated from the previous one
// by a comma. Innermost parentheses (degrees of freedom) are dropped first so
// "N = 90" inside "χ2(1, N = 90)" is not counted.
bool comma_separated(const std::string& fragment) {
  static const boost::regex inner(R"(\([^()]*\)(?=\s?(?:=|<|>|≤|≥)))");
  static const boost::regex op(R"(<=|>=|[=<>]|≤|≥)");
  std::string flat = boost::regex_replace(fragment, inner, "");
  auto it = boost::sregex_iterator(flat.begin(), flat.end(), op);
  auto end = boost::sregex_iterator();
  std::size_t prev_end = std::string::npos;
  for (; it != end; ++it) {
    auto pos = static_cast<std::size_t>(it->position());
    if (prev_end != std::string::npos && flat.find(',', prev_end) >= pos) return false;
    prev_end = pos + static_cast<std::size_t>(it->length());
  }
  return true;
}

}  // namespace

bool classify_apa(const StatisticRecord& record, std::string_view fragment) {
  if (!record.missing_params.empty()) return false;
  const Checklist* c = checklist(record.stat_type);
  if (c == nullptr) return false;
  std::string text(fragment);

  static const boost::regex lower_p(R"((?<![A-Za-z])p\s?(?:<=|>=|[=<>]|≤|≥))");
  static const boost::regex upper_p(R"((?<![A-Za-z])P\s?(?:<=|>=|[=<>]|≤|≥))");
  static const boost::regex leading_zero_p(R"((?<![A-Za-z])[pP]\s?(?:<=|>=|[=<>]|≤|≥)\s?0\.)");
  static const boost::regex lower_z(R"((?<![A-Za-z])z\s?=)");

  if (!boost::regex_search(text, c->symbol)) return false;
  if (c->needs_z && !boost::regex_search(text, lower_z)) return false;
  if (!boost::regex_search(text, lower_p) || boost::regex_search(text, upper_p)) return false;
  if (boost::regex_search(text, leading_zero_p)) return false;
  return comma_separated(text);
}

}  // namespace stereo::rules
