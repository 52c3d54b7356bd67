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

#include "stereo/embedding.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "stereo/error.hpp"
#include "stereo/resources.hpp"
#include "stereo/text.hpp"

namespace stereo::embed {

namespace {

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80; }
bool is_word(unsigned char c) { return is_alpha(c) || is_digit(static_cast<char>(c)); }

bool ends_with(const std::string& s, std::string_view suf) {
  return s.size() >= suf.size() && std::string_view(s).substr(s.size() - suf.size()) == suf;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (std::any_of(cur.begin(), cur.end(), [](unsigned char c) { return is_alpha(c); })) {
      out.push_back(to_lower_ascii(cur));
    }
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_word(c)) {
      cur += static_cast<char>(c);
    } else if (c == '-' && !cur.empty() && i + 1 < text.size() &&
               is_word(static_cast<unsigned char>(text[i + 1]))) {
      cur += '-';
    } else {
      flush();
    }
  }
  flush();
  return out;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = [] {
    std::set<std::string> s;
    std::istringstream in{std::string(resource("stopwords.txt"))};
    std::string line;
    while (std::getline(in, line)) {
      auto w = trim(line);
      if (!w.empty()) s.emplace(w);
    }
    return s;
  }();
  return words;
}

Lemmatizer::Lemmatizer(std::map<std::string, std::string> table) : table_(std::move(table)) {}

const Lemmatizer& Lemmatizer::bundled() {
  static const Lemmatizer lem = [] {
    std::map<std::string, std::string> table;
    std::istringstream in{std::string(resource("lemmas.tsv"))};
    std::string line;
    while (std::getline(in, line)) {
      auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      table.emplace(line.substr(0, tab), std::string(trim(line.substr(tab + 1))));
    }
    return Lemmatizer(std::move(table));
  }();
  return lem;
}

std::string Lemmatizer::lemma(const std::string& word) const {
  if (auto it = table_.find(word); it != table_.end()) return it->second;
  if (word.size() <= 3) return word;
  if (ends_with(word, "ies") && word.size() > 4) return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "ied") && word.size() > 4) return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "sses")) return word.substr(0, word.size() - 2);
  for (std::string_view suf : {"ches", "shes", "xes", "zes"}) {
    if (ends_with(word, suf)) return word.substr(0, word.size() - 2);
  }
  if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") && !ends_with(word, "is")) {
    return word.substr(0, word.size() - 1);
  }
  return word;
}

std::vector<std::string> preprocess(std::string_view text) {
  const auto& stop = stopwords();
  const auto& lem = Lemmatizer::bundled();
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) {
    if (stop.count(t)) continue;
    out.push_back(lem.lemma(t));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) throw Error("vocabulary words and counts differ in length");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw Error("duplicate vocabulary word: " + words_[i]);
  }
}

std::optional<std::size_t> Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::uint64_t min_count) {
  std::map<std::string, std::uint64_t> freq;
  std::uint64_t total = 0;
  for (const auto& s : corpus) {
    for (const auto& t : s) {
      ++freq[t];
      ++total;
    }
  }
  if (total == 0) throw Error("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  std::uint64_t kept_tokens = 0;
  for (const auto& [w, n] : freq) {
    if (n >= min_count) {
      kept.emplace_back(w, n);
      kept_tokens += n;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  for (auto& [w, n] : kept) {
    words.push_back(w);
    counts.push_back(n);
  }
  Vocabulary v(std::move(words), std::move(counts));
  v.min_count = min_count;
  v.coverage = static_cast<double>(kept_tokens) / static_cast<double>(total);
  return v;
}

std::vector<std::vector<std::size_t>> encode(const std::vector<std::vector<std::string>>& corpus,
                                             const Vocabulary& vocab) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& t : s) {
      if (auto id = vocab.find(t)) ids.push_back(*id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

std::optional<std::size_t> Embedding::find(const std::string& word) const {
  auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end()) return std::nullopt;
  return static_cast<std::size_t>(it - words.begin());
}

void save_embedding(const std::filesystem::path& path, const Embedding& e) {
  std::ostringstream out;
  out << e.words.size() << ' ' << e.vectors.cols() << '\n';
  for (std::size_t i = 0; i < e.words.size(); ++i) {
    out << e.words[i];
    for (Eigen::Index j = 0; j < e.vectors.cols(); ++j) out << ' ' << format_number(e.vectors(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
  write_file(path, out.str());
}

Embedding load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file " + path.string());
  std::size_t n = 0;
  long d = 0;
  if (!(in >> n >> d) || d <= 0) throw ParseError(path.string() + ": bad header, expected '|V| d'");
  Embedding e;
  e.vectors.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    if (!(in >> w)) throw ParseError(path.string() + ": expected " + std::to_string(n) + " rows");
    e.words.push_back(w);
    for (long j = 0; j < d; ++j) {
      if (!(in >> e.vectors(static_cast<Eigen::Index>(i), j))) {
        throw ParseError(path.string() + ": row " + std::to_string(i + 1) + " has fewer than " + std::to_string(d) +
                         " values");
      }
    }
  }
  if (!e.vectors.allFinite()) throw ParseError(path.string() + ": non-finite embedding value");
  return e;
}

}  // namespace stereo::embed
