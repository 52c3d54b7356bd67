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

#include "stereo/gbce.hpp"

#include <algorithm>
#include <optional>

#include "stereo/error.hpp"
#include "stereo/resources.hpp"
#include "stereo/text.hpp"

namespace stereo::gbce {

namespace {

bool starts_with(std::string_view s, std::size_t i, std::string_view what) { return s.substr(i, what.size()) == what; }

constexpr std::string_view kOpenQuote = "\xE2\x80\x9C";   // U+201C
constexpr std::string_view kCloseQuote = "\xE2\x80\x9D";  // U+201D

std::string tidy(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      continue;
    }
    if (c == ',' || c == '.' || c == ':' || c == '!' || c == '?') {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      if ((c == ',' || c == '.') && !out.empty() && out.back() == ',') out.pop_back();
      if (out.empty() && c == ',') continue;
    }
    out += c;
  }
  auto t = std::string(trim(out));
  while (!t.empty() && t.back() == ',') t.pop_back();
  return std::string(trim(t));
}

}  // namespace

CleanText preprocess_tree_input(std::string_view sentence, const std::vector<rules::StatisticRecord>& records) {
  CleanText out;
  std::vector<bool> drop(sentence.size(), false);
  for (const auto& r : records) {
    for (std::size_t i = r.span.start; i < r.span.end && i < sentence.size(); ++i) drop[i] = true;
  }
  std::size_t cut = sentence.size();
  int depth = 0;
  bool in_quote = false;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (drop[i]) continue;
    char c = sentence[i];
    if (depth == 0) {
      if (c == '"') {
        in_quote = !in_quote;
        continue;
      }
      if (starts_with(sentence, i, kOpenQuote)) in_quote = true;
      if (starts_with(sentence, i, kCloseQuote)) in_quote = false;
      if (in_quote) continue;
    }
    if (c == '(') {
      ++depth;
      drop[i] = true;
    } else if (c == ')') {
      drop[i] = true;
      if (depth > 0) {
        --depth;
      } else {
        out.warnings.push_back("unmatched ')' at byte " + std::to_string(i));
      }
    } else if (depth > 0) {
      drop[i] = true;
    } else if (c == ';') {
      cut = i;
      break;
    }
  }
  if (depth > 0) out.warnings.push_back("unbalanced '(' removed to the end of the sentence");
  std::string kept;
  for (std::size_t i = 0; i < cut; ++i) {
    if (!drop[i]) kept += sentence[i];
  }
  out.text = tidy(kept);
  return out;
}

namespace {

const std::set<std::string>& modifier_relations() {
  static const std::set<std::string> mods{
      "det",   "predet", "amod",     "nummod", "quantmod",  "compound", "nmod",       "npadvmod",   "nounmod",
      "advmod", "appos", "poss",     "prep",   "pobj",      "case",     "acl",        "relcl",      "acl:relcl",
      "advcl", "nmod:poss", "nmod:npmod", "obl:npmod", "flat", "fixed", "compound:prt", "det:poss"};
  return mods;
}

bool is_noun_head(const Token& t) { return t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "PRON"; }

bool is_quote(const Token& t) { return t.form == "\"" || t.form == kOpenQuote || t.form == kCloseQuote; }

std::string lower(std::string_view s) { return to_lower_ascii(s); }

std::string lemma_of(const Token& t) { return lower(t.lemma.empty() || t.lemma == "_" ? t.form : t.lemma); }

// Paired quotation token ranges.
std::vector<std::pair<std::size_t, std::size_t>> quotations(const ParsedSentence& p) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t open = 0;
  for (const auto& t : p.tokens) {
    if (!is_quote(t)) continue;
    bool closes = open != 0 && t.form != kOpenQuote;
    if (closes) {
      out.emplace_back(open, t.index);
      open = 0;
    } else if (t.form != kCloseQuote) {
      open = t.index;
    }
  }
  return out;
}

}  // namespace

std::vector<NounPhrase> extract_noun_phrases(const ParsedSentence& parsed) {
  std::vector<NounPhrase> out;
  auto quotes = quotations(parsed);
  for (const auto& head : parsed.tokens) {
    if (!is_noun_head(head)) continue;
    NounPhrase np;
    np.head = head.index;
    std::size_t first = head.index;
    std::size_t last = head.index;
    for (std::size_t c : parsed.children(head.index)) {
      const auto& child = parsed.token(c);
      if (!modifier_relations().count(child.deprel)) continue;
      np.modifiers.insert(child.deprel);
      for (std::size_t t : parsed.subtree(c)) {
        first = std::min(first, t);
        last = std::max(last, t);
      }
    }
    // A phrase never starts with its own preposition or punctuation.
    auto strippable = [&](std::size_t i) {
      const auto& t = parsed.token(i);
      return t.head == head.index && (t.deprel == "case" || t.deprel == "prep" || t.deprel == "punct" ||
                                      t.deprel == "cc" || t.upos == "PUNCT");
    };
    while (first < head.index && strippable(first)) {
      // Skip the whole subtree of a stripped leading token.
      auto sub = parsed.subtree(first);
      std::size_t next = first + 1;
      while (std::find(sub.begin(), sub.end(), next) != sub.end() && next < head.index) ++next;
      first = next;
    }
    while (last > head.index && parsed.token(last).upos == "PUNCT" && !is_quote(parsed.token(last))) --last;
    for (const auto& [qo, qc] : quotes) {
      bool touches = false;
      for (std::size_t i = std::max(first, qo); i <= std::min(last, qc); ++i) touches = true;
      if (touches) {
        first = std::min(first, qo);
        last = std::max(last, qc);
      }
    }
    np.first = first;
    np.last = last;
    np.text = parsed.render(first, last);
    out.push_back(std::move(np));
  }
  return out;
}

GrammarRules grammar_rules_from_json(const nlohmann::json& j) {
  try {
    GrammarRules g;
    for (const auto& r : j.at("negative")) g.negative.push_back({r.at("id").get<std::string>(), false, r.at("match")});
    for (const auto& r : j.at("positive")) {
      auto kind = r.at("kind").get<std::string>();
      if (kind != "terminal" && kind != "sub") throw ParseError("grammar rule kind must be terminal or sub");
      g.positive.push_back({r.at("id").get<std::string>(), kind == "terminal", r.at("match")});
    }
    if (j.contains("bag_of_words")) {
      for (const auto& w : j["bag_of_words"]) g.bag_of_words.insert(lower(w.get<std::string>()));
    }
    for (const auto* set : {&g.negative, &g.positive}) {
      for (const auto& r : *set) {
        if (!r.match.is_object() || !r.match.contains("family")) {
          throw ParseError("grammar rule '" + r.id + "' has no match.family");
        }
      }
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad grammar rules: ") + e.what());
  }
}

nlohmann::json to_json(const GrammarRules& g) {
  nlohmann::json neg = nlohmann::json::array();
  nlohmann::json pos = nlohmann::json::array();
  for (const auto& r : g.negative) neg.push_back({{"id", r.id}, {"match", r.match}});
  for (const auto& r : g.positive) {
    pos.push_back({{"id", r.id}, {"kind", r.terminal ? "terminal" : "sub"}, {"match", r.match}});
  }
  return {{"negative", neg}, {"positive", pos}, {"bag_of_words", g.bag_of_words}};
}

GrammarRules load_grammar_rules(const std::filesystem::path& path) {
  try {
    return grammar_rules_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

GrammarRules bundled_grammar_rules() {
  return grammar_rules_from_json(nlohmann::json::parse(resource("grammar_rules.json")));
}

namespace {

std::set<std::string> string_set(const nlohmann::json& match, const char* key, std::set<std::string> fallback = {}) {
  if (!match.contains(key)) return fallback;
  std::set<std::string> out;
  for (const auto& v : match[key]) out.insert(v.get<std::string>());
  return out;
}

std::set<std::string> lower_set(const std::set<std::string>& in) {
  std::set<std::string> out;
  for (const auto& s : in) out.insert(lower(s));
  return out;
}

// An accepted condition group: its token range and the strings it yields.
struct Item {
  std::size_t first;
  std::size_t last;
  std::vector<std::string> texts;
  std::size_t order;
};

const NounPhrase* np_for_head(const std::vector<NounPhrase>& nps, const std::vector<bool>& alive, std::size_t head) {
  for (std::size_t i = 0; i < nps.size(); ++i) {
    if (alive[i] && nps[i].head == head) return &nps[i];
  }
  return nullptr;
}

bool filter_matches(const nlohmann::json& m, const Token& head) {
  auto check = [&](const char* key, const std::string& value, bool fold) {
    if (!m.contains(key)) return true;
    auto allowed = string_set(m, key);
    if (fold) allowed = lower_set(allowed);
    return allowed.count(fold ? lower(value) : value) > 0;
  };
  return check("head_upos", head.upos, false) && check("head_xpos", head.xpos, false) &&
         check("head_lemma", lemma_of(head), true) && check("head_deprel", head.deprel, false);
}

// Comparative pattern: subject noun, verb, comparative, "than", object noun.
std::optional<std::vector<std::size_t>> comparative_heads(const ParsedSentence& p, const nlohmann::json& m) {
  auto xpos = string_set(m, "comparative_xpos", {"JJR", "RBR"});
  auto subj_rel = string_set(m, "subject_deprels", {"nsubj", "nsubjpass", "nsubj:pass"});
  std::string than = m.value("than", std::string("than"));
  for (const auto& c : p.tokens) {
    if (!xpos.count(c.xpos)) continue;
    // Climb to the nearest ancestor carrying a nominal subject.
    std::size_t subject = 0;
    std::size_t gov = c.head;
    while (gov != 0 && subject == 0) {
      for (std::size_t ch : p.children(gov)) {
        const auto& t = p.token(ch);
        if (subj_rel.count(t.deprel) && (t.upos == "NOUN" || t.upos == "PROPN")) subject = ch;
      }
      if (subject == 0) gov = p.token(gov).head;
    }
    if (subject == 0) continue;
    auto scope = p.subtree(gov);
    std::size_t object = 0;
    for (std::size_t t : scope) {
      const auto& tok = p.token(t);
      if (t <= c.index || lower(tok.form) != than) continue;
      for (std::size_t ch : p.children(t)) {
        const auto& o = p.token(ch);
        if (o.upos == "NOUN" || o.upos == "PROPN") object = ch;
      }
      if (object == 0 && tok.head != 0) {
        const auto& o = p.token(tok.head);
        if ((o.upos == "NOUN" || o.upos == "PROPN") && o.index > t) object = o.index;
      }
      if (object != 0) break;
    }
    if (object == 0) continue;
    return std::vector<std::size_t>{subject, object};
  }
  return std::nullopt;
}

std::string element_text(const ParsedSentence& p, std::size_t e) {
  static const std::set<std::string> skip{"conj", "cc", "punct", "preconj"};
  std::size_t first = e;
  std::size_t last = e;
  for (std::size_t ch : p.children(e)) {
    if (skip.count(p.token(ch).deprel)) continue;
    for (std::size_t t : p.subtree(ch)) {
      first = std::min(first, t);
      last = std::max(last, t);
    }
  }
  while (first < e && (p.token(first).deprel == "case" || p.token(first).deprel == "prep")) ++first;
  return p.render(first, last);
}

}  // namespace

ConditionSet apply_condition_rules(const ParsedSentence& parsed, const std::vector<NounPhrase>& nps,
                                   const GrammarRules& rules) {
  ConditionSet out;
  std::vector<bool> alive(nps.size(), true);
  auto trace = [&](const std::string& id) {
    if (std::find(out.rule_trace.begin(), out.rule_trace.end(), id) == out.rule_trace.end()) out.rule_trace.push_back(id);
  };

  for (const auto& rule : rules.negative) {
    auto family = rule.match.at("family").get<std::string>();
    bool fired = false;
    if (family == "np_filter") {
      for (std::size_t i = 0; i < nps.size(); ++i) {
        if (alive[i] && filter_matches(rule.match, parsed.token(nps[i].head))) {
          alive[i] = false;
          fired = true;
        }
      }
    } else if (family == "aux_root") {
      auto root_upos = string_set(rule.match, "root_upos", {"AUX"});
      auto subj = string_set(rule.match, "subject_deprels", {"nsubj", "nsubjpass", "nsubj:pass", "expl"});
      // A copula carrying a comparative ("X was higher than Y") keeps its subject.
      auto keep_xpos = string_set(rule.match, "unless_child_xpos");
      bool applies = parsed.root != 0 && root_upos.count(parsed.token(parsed.root).upos);
      for (std::size_t ch : applies ? parsed.children(parsed.root) : std::vector<std::size_t>{}) {
        if (keep_xpos.count(parsed.token(ch).xpos)) applies = false;
      }
      if (applies) {
        for (std::size_t i = 0; i < nps.size(); ++i) {
          const auto& h = parsed.token(nps[i].head);
          if (alive[i] && h.head == parsed.root && subj.count(h.deprel)) {
            alive[i] = false;
            fired = true;
          }
        }
      }
    } else {
      throw ConfigError("unknown negative grammar family '" + family + "' in rule " + rule.id);
    }
    if (fired) trace(rule.id);
  }

  std::vector<Item> items;
  std::vector<bool> taken(nps.size(), false);
  for (const auto& rule : rules.positive) {
    auto family = rule.match.at("family").get<std::string>();
    std::size_t before = items.size();
    if (family == "comparative") {
      auto heads = comparative_heads(parsed, rule.match);
      if (heads) {
        std::vector<std::string> texts;
        for (std::size_t h : *heads) {
          const NounPhrase* np = np_for_head(nps, alive, h);
          if (np == nullptr) {
            texts.clear();
            break;
          }
          texts.push_back(np->text);
        }
        if (!texts.empty() && rule.terminal) {
          out.conditions = texts;
          trace(rule.id);
          return out;
        }
        if (!texts.empty()) items.push_back({(*heads)[0], (*heads)[1], texts, items.size()});
      }
    } else if (family == "relative_clause") {
      auto rels = string_set(rule.match, "deprels", {"relcl", "acl:relcl", "acl"});
      auto words = lower_set(string_set(rule.match, "interrogatives", {"who", "which", "whom", "whose", "where", "when"}));
      for (std::size_t i = 0; i < nps.size(); ++i) {
        if (!alive[i] || taken[i]) continue;
        for (std::size_t ch : parsed.children(nps[i].head)) {
          if (!rels.count(parsed.token(ch).deprel)) continue;
          auto sub = parsed.subtree(ch);
          if (!sub.empty() && words.count(lower(parsed.token(sub.front()).form))) {
            items.push_back({nps[i].first, nps[i].last, {nps[i].text}, items.size()});
            taken[i] = true;
            break;
          }
        }
      }
    } else if (family == "enumeration") {
      auto distribute = string_set(rule.match, "distribute_deprels", {"appos", "compound", "nmod", "npadvmod", "nummod", "flat"});
      for (std::size_t i = 0; i < nps.size(); ++i) {
        if (!alive[i] || taken[i]) continue;
        const auto& head = parsed.token(nps[i].head);
        if (head.deprel == "conj") continue;  // only the first conjunct opens an enumeration
        std::vector<std::size_t> elems{head.index};
        for (std::size_t k = 0; k < elems.size(); ++k) {
          for (std::size_t ch : parsed.children(elems[k])) {
            if (parsed.token(ch).deprel == "conj") elems.push_back(ch);
          }
        }
        if (elems.size() < 2) continue;
        std::sort(elems.begin(), elems.end());
        std::vector<std::string> texts;
        std::size_t first = elems.front();
        std::size_t last = elems.back();
        const Token* shared = nullptr;
        if (head.head != 0 && distribute.count(head.deprel)) {
          const auto& g = parsed.token(head.head);
          if ((g.upos == "NOUN" || g.upos == "PROPN") && g.index < head.index) shared = &g;
        }
        for (std::size_t e : elems) {
          auto t = element_text(parsed, e);
          texts.push_back(shared ? lemma_of(*shared) + " " + t : t);
        }
        if (shared) first = std::min(first, shared->index);
        items.push_back({first, last, texts, items.size()});
        for (std::size_t j = 0; j < nps.size(); ++j) {
          if (std::find(elems.begin(), elems.end(), nps[j].head) != elems.end()) taken[j] = true;
        }
      }
    } else if (family == "np_accept") {
      std::set<std::string> lemmas = lower_set(string_set(rule.match, "head_lemma"));
      if (rule.match.value("use_bag_of_words", false)) lemmas.insert(rules.bag_of_words.begin(), rules.bag_of_words.end());
      for (std::size_t i = 0; i < nps.size(); ++i) {
        if (!alive[i] || taken[i]) continue;
        if (lemmas.count(lemma_of(parsed.token(nps[i].head)))) {
          items.push_back({nps[i].first, nps[i].last, {nps[i].text}, items.size()});
          taken[i] = true;
        }
      }
    } else {
      throw ConfigError("unknown positive grammar family '" + family + "' in rule " + rule.id);
    }
    if (items.size() > before) trace(rule.id);
  }

  // Overlapping groups: the longer token range wins, then the earlier rule.
  std::vector<const Item*> order;
  for (const auto& it : items) order.push_back(&it);
  std::sort(order.begin(), order.end(), [](const Item* a, const Item* b) {
    auto la = a->last - a->first;
    auto lb = b->last - b->first;
    if (la != lb) return la > lb;
    return a->order < b->order;
  });
  std::vector<const Item*> kept;
  for (const Item* it : order) {
    bool clash = std::any_of(kept.begin(), kept.end(),
                             [&](const Item* k) { return it->first <= k->last && k->first <= it->last; });
    if (!clash) kept.push_back(it);
  }
  std::sort(kept.begin(), kept.end(), [](const Item* a, const Item* b) { return a->first < b->first; });
  for (const Item* it : kept) {
    for (const auto& t : it->texts) {
      if (std::find(out.conditions.begin(), out.conditions.end(), t) == out.conditions.end()) {
        out.conditions.push_back(t);
      }
    }
  }
  return out;
}

ConditionResult extract_conditions(std::string_view sentence, const std::vector<rules::StatisticRecord>& records,
                                   const ParsedSentence* parsed, const GrammarRules& rules) {
  ConditionResult res;
  auto clean = preprocess_tree_input(sentence, records);
  res.clean_text = clean.text;
  res.warnings = clean.warnings;
  if (parsed == nullptr) {
    res.outcome = Outcome::no_parse;
    return res;
  }
  res.set = apply_condition_rules(*parsed, extract_noun_phrases(*parsed), rules);
  return res;
}

}  // namespace stereo::gbce
