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

#include <algorithm>

#include "stereo/error.hpp"
#include "stereo/regex_dialect.hpp"
#include "stereo/resources.hpp"
#include "stereo/rules.hpp"

namespace stereo::rules {

std::string_view to_string(StatType t) {
  switch (t) {
    case StatType::ttest: return "ttest";
    case StatType::pearson: return "pearson";
    case StatType::spearman: return "spearman";
    case StatType::anova: return "anova";
    case StatType::mann_whitney_u: return "mann_whitney_u";
    case StatType::wilcoxon: return "wilcoxon";
    case StatType::chi_square: return "chi_square";
    case StatType::other: return "other";
    case StatType::p_only: return "p_only";
  }
  return "other";
}

std::string_view to_string(Param p) {
  switch (p) {
    case Param::doF: return "doF";
    case Param::statisticVal: return "statisticVal";
    case Param::pval: return "pval";
    case Param::effect_r: return "effect_r";
    case Param::N: return "N";
    case Param::U: return "U";
    case Param::z: return "z";
    case Param::fval: return "fval";
    case Param::rs: return "rs";
    case Param::chi2: return "chi2";
    case Param::V: return "V";
  }
  return "pval";
}

std::string_view to_string(Status s) {
  return s == Status::all_covered ? "all_covered" : "has_unclassified";
}

std::optional<StatType> stat_type_from_string(std::string_view s) {
  for (StatType t : kAllStatTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<Param> param_from_string(std::string_view s) {
  for (Param p : kAllParams) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

const std::vector<Param>& required_params(StatType t) {
  using P = Param;
  static const std::vector<P> ttest{P::doF, P::statisticVal, P::pval};
  static const std::vector<P> pearson{P::doF, P::effect_r, P::pval};
  static const std::vector<P> spearman{P::doF, P::rs, P::pval};
  static const std::vector<P> anova{P::doF, P::fval, P::pval, P::effect_r};
  static const std::vector<P> mwu{P::U, P::z, P::pval, P::effect_r};
  static const std::vector<P> wilcoxon{P::statisticVal, P::z, P::pval};
  static const std::vector<P> chi{P::chi2, P::N, P::pval, P::V};
  static const std::vector<P> none;
  switch (t) {
    case StatType::ttest: return ttest;
    case StatType::pearson: return pearson;
    case StatType::spearman: return spearman;
    case StatType::anova: return anova;
    case StatType::mann_whitney_u: return mwu;
    case StatType::wilcoxon: return wilcoxon;
    case StatType::chi_square: return chi;
    case StatType::other:
    case StatType::p_only: return none;
  }
  return none;
}

const std::vector<Param>& param_universe(StatType t) {
  using P = Param;
  static const std::vector<P> ttest{P::doF, P::statisticVal, P::pval, P::effect_r};
  static const std::vector<P> wilcoxon{P::statisticVal, P::z, P::pval, P::effect_r};
  static const std::vector<P> chi{P::chi2, P::N, P::pval, P::V, P::doF};
  static const std::vector<P> p_only{P::pval};
  switch (t) {
    case StatType::ttest: return ttest;
    case StatType::wilcoxon: return wilcoxon;
    case StatType::chi_square: return chi;
    case StatType::p_only: return p_only;
    default: return required_params(t);
  }
}

bool in_universe(StatType t, Param p) {
  const auto& u = param_universe(t);
  return std::find(u.begin(), u.end(), p) != u.end();
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string(what) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json to_json(const PositiveRule& r) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : r.sub_rules) {
    subs.push_back({{"param", std::string(to_string(s.param))}, {"pattern", s.pattern}});
  }
  return {{"rule_id", r.rule_id},
          {"stat_type", std::string(to_string(r.stat_type))},
          {"pattern", r.pattern},
          {"sub_rules", subs},
          {"apa_template", r.apa_template}};
}

nlohmann::json to_json(const NegativeRule& r) {
  return {{"rule_id", r.rule_id}, {"pattern", r.pattern}};
}

nlohmann::json to_json(const RuleSets& rs) {
  nlohmann::json pos = nlohmann::json::array();
  nlohmann::json neg = nlohmann::json::array();
  for (const auto& r : rs.positive) pos.push_back(to_json(r));
  for (const auto& r : rs.negative) neg.push_back(to_json(r));
  return {{"version", rs.version}, {"positive", pos}, {"negative", neg}};
}

PositiveRule positive_rule_from_json(const nlohmann::json& j) {
  PositiveRule r;
  r.rule_id = field<std::string>(j, "rule_id", "positive rule");
  auto type = field<std::string>(j, "stat_type", "positive rule");
  auto st = stat_type_from_string(type);
  if (!st) throw ParseError("positive rule '" + r.rule_id + "': unknown stat_type '" + type + "'");
  r.stat_type = *st;
  r.pattern = field<std::string>(j, "pattern", "positive rule");
  r.apa_template = j.contains("apa_template") ? field<bool>(j, "apa_template", "positive rule") : false;
  if (j.contains("sub_rules")) {
    if (!j["sub_rules"].is_array()) throw ParseError("positive rule '" + r.rule_id + "': sub_rules must be a list");
    for (const auto& s : j["sub_rules"]) {
      auto name = field<std::string>(s, "param", "sub-rule");
      auto p = param_from_string(name);
      if (!p) throw ParseError("positive rule '" + r.rule_id + "': unknown param '" + name + "'");
      r.sub_rules.push_back({*p, field<std::string>(s, "pattern", "sub-rule")});
    }
  }
  return r;
}

NegativeRule negative_rule_from_json(const nlohmann::json& j) {
  return {field<std::string>(j, "rule_id", "negative rule"), field<std::string>(j, "pattern", "negative rule")};
}

RuleSets rulesets_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("rule-set document is not an object");
  RuleSets rs;
  rs.version = j.contains("version") ? field<long>(j, "version", "rule sets") : 0;
  if (j.contains("positive")) {
    for (const auto& r : j["positive"]) rs.positive.push_back(positive_rule_from_json(r));
  }
  if (j.contains("negative")) {
    for (const auto& r : j["negative"]) rs.negative.push_back(negative_rule_from_json(r));
  }
  return rs;
}

std::string serialize(const RuleSets& rs) { return to_json(rs).dump(2) + "\n"; }

RuleSets load_rulesets(const std::filesystem::path& path) {
  auto text = read_file(path);
  try {
    return rulesets_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_rulesets(const std::filesystem::path& path, const RuleSets& rs) { write_file(path, serialize(rs)); }

RuleSets starter_rulesets() {
  return rulesets_from_json(nlohmann::json::parse(resource("starter_rules.json")));
}

namespace {

// Conservative syntactic test: can the pattern consume a digit at all?
bool may_match_digit(std::string_view src) {
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    if (c == '\\' && i + 1 < src.size()) {
      char n = src[i + 1];
      if (n == 'd' || n == 'w' || n == 'S' || n == 'W' || n == 'D') return true;
      ++i;
      continue;
    }
    if (is_digit(c) || c == '.') return true;
    if (c == '[' && i + 1 < src.size() && src[i + 1] == '^') return true;
  }
  return false;
}

boost::regex compile_or_throw(const std::string& pattern, const std::string& rule_id) {
  boost::regex re;
  RegexDiagnostic diag;
  if (!compile_pattern(pattern, re, diag)) {
    throw RuleError("rule '" + rule_id + "': pattern does not compile: " + diag.message, rule_id, diag.position);
  }
  return re;
}

bool matches_zero_width(const boost::regex& re) {
  static const char* probes[] = {"", "a", "1", "a 1 b", "(1)"};
  for (const char* probe : probes) {
    std::string s(probe);
    boost::smatch m;
    auto begin = s.cbegin();
    while (begin <= s.cend()) {
      if (!boost::regex_search(begin, s.cend(), m, re,
                               begin == s.cbegin() ? boost::match_default
                                                   : boost::match_default | boost::match_prev_avail)) {
        break;
      }
      if (m.length(0) == 0) return true;
      begin = m[0].second;
    }
  }
  return false;
}

}  // namespace

void validate(const PositiveRule& r) {
  if (r.rule_id.empty()) throw RuleError("positive rule without rule_id", r.rule_id);
  auto re = compile_or_throw(r.pattern, r.rule_id);
  int type_groups = 0;
  for (const auto& name : named_groups(r.pattern)) {
    auto st = stat_type_from_string(name);
    if (!st) continue;
    ++type_groups;
    if (*st != r.stat_type) {
      throw RuleError("rule '" + r.rule_id + "': type group '" + name + "' does not match stat_type '" +
                          std::string(to_string(r.stat_type)) + "'",
                      r.rule_id);
    }
  }
  if (type_groups != 1) {
    throw RuleError("rule '" + r.rule_id + "': pattern needs exactly one statistic-type named group", r.rule_id);
  }
  if (!may_match_digit(r.pattern)) throw RuleError("rule '" + r.rule_id + "': pattern cannot match a digit", r.rule_id);
  if (matches_zero_width(re)) throw RuleError("rule '" + r.rule_id + "': pattern admits a zero-width match", r.rule_id);
  for (const auto& s : r.sub_rules) {
    auto pname = std::string(to_string(s.param));
    if (!in_universe(r.stat_type, s.param)) {
      throw RuleError("rule '" + r.rule_id + "': param '" + pname + "' is not defined for " +
                          std::string(to_string(r.stat_type)),
                      r.rule_id);
    }
    compile_or_throw(s.pattern, r.rule_id);
    auto names = named_groups(s.pattern);
    if (std::find(names.begin(), names.end(), pname) == names.end()) {
      throw RuleError("rule '" + r.rule_id + "': sub-rule lacks a named group '" + pname + "'", r.rule_id);
    }
  }
}

void validate(const NegativeRule& r) {
  if (r.rule_id.empty()) throw RuleError("negative rule without rule_id", r.rule_id);
  auto re = compile_or_throw(r.pattern, r.rule_id);
  if (!may_match_digit(r.pattern)) throw RuleError("rule '" + r.rule_id + "': pattern cannot match a digit", r.rule_id);
  if (matches_zero_width(re)) throw RuleError("rule '" + r.rule_id + "': pattern admits a zero-width match", r.rule_id);
}

nlohmann::json to_json(const StatisticRecord& r, std::string_view sentence_text) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [p, v] : r.params) params[std::string(to_string(p))] = v;
  nlohmann::json missing = nlohmann::json::array();
  for (Param p : r.missing_params) missing.push_back(std::string(to_string(p)));
  return {{"doc_id", r.doc_id},
          {"sentence_index", r.sentence_index},
          {"stat_type", std::string(to_string(r.stat_type))},
          {"rule_id", r.rule_id},
          {"params", params},
          {"span", {{"start", r.span.start}, {"end", r.span.end}}},
          {"fragment", r.fragment},
          {"apa_conform", r.apa_conform},
          {"missing_params", missing},
          {"warnings", r.warnings},
          {"sentence_text", std::string(sentence_text)}};
}

StatisticRecord record_from_json(const nlohmann::json& j, std::string* sentence_text) {
  try {
    StatisticRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.sentence_index = j.at("sentence_index").get<std::size_t>();
    auto type = j.at("stat_type").get<std::string>();
    auto st = stat_type_from_string(type);
    if (!st) throw ParseError("record: unknown stat_type '" + type + "'");
    r.stat_type = *st;
    if (j.contains("rule_id")) r.rule_id = j["rule_id"].get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) {
      auto p = param_from_string(k);
      if (!p) throw ParseError("record: unknown param '" + k + "'");
      r.params[*p] = v.get<double>();
    }
    r.span.start = j.at("span").at("start").get<std::size_t>();
    r.span.end = j.at("span").at("end").get<std::size_t>();
    r.fragment = j.at("fragment").get<std::string>();
    r.apa_conform = j.at("apa_conform").get<bool>();
    for (const auto& m : j.at("missing_params")) {
      auto p = param_from_string(m.get<std::string>());
      if (!p) throw ParseError("record: unknown param '" + m.get<std::string>() + "'");
      r.missing_params.insert(*p);
    }
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    if (sentence_text && j.contains("sentence_text")) *sentence_text = j["sentence_text"].get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad statistic record: ") + e.what());
  }
}

}  // namespace stereo::rules
