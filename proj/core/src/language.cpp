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
#include <cmath>
#include <limits>
#include <unordered_map>

#include "stereo/error.hpp"
#include "stereo/ingest.hpp"
#include "stereo/resources.hpp"

namespace stereo::ingest {
namespace {

// Lowercased letter, or 0 for anything that separates words.
char32_t fold_letter(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 'a' && cp <= 'z') return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0xDF && cp < 0x250 && cp != 0xF7) return cp;
  return 0;
}

std::unordered_map<std::u32string, std::size_t> count_trigrams(std::string_view text) {
  std::unordered_map<std::u32string, std::size_t> counts;
  std::u32string word;
  auto flush = [&] {
    // Single letters are mostly statistic symbols (t, p, z) and carry no
    // language signal.
    if (word.size() < 2) {
      word.clear();
      return;
    }
    std::u32string padded = U" " + word + U" ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) counts[padded.substr(i, 3)] += 1;
    word.clear();
  };
  for (char32_t cp : utf8_decode(text)) {
    char32_t f = fold_letter(cp);
    if (f == 0) {
      flush();
    } else {
      word.push_back(f);
    }
  }
  flush();
  return counts;
}

std::size_t word_letters(std::string_view text) {
  std::size_t total = 0;
  std::size_t run = 0;
  for (char32_t cp : utf8_decode(text)) {
    if (fold_letter(cp) != 0) {
      ++run;
      continue;
    }
    if (run >= 2) total += run;
    run = 0;
  }
  return run >= 2 ? total + run : total;
}

}  // namespace

std::vector<std::u32string> trigram_profile(std::string_view text, std::size_t limit) {
  auto counts = count_trigrams(text);
  std::vector<std::pair<std::u32string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::u32string> out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(ranked[i].first);
  return out;
}

LanguageDetector::LanguageDetector(const std::vector<std::pair<std::string, std::string>>& samples,
                                   Options options)
    : options_(std::move(options)) {
  if (samples.empty()) throw ConfigError("language detector needs at least one profile");
  for (const auto& [code, text] : samples) {
    Profile p;
    p.code = code;
    auto ranked = trigram_profile(text, options_.profile_size);
    for (std::size_t i = 0; i < ranked.size(); ++i) p.rank.emplace(ranked[i], i);
    profiles_.push_back(std::move(p));
  }
}

const LanguageDetector& LanguageDetector::bundled() {
  static const LanguageDetector detector(
      {
          {"en", std::string(resource("lang/en.txt"))},
          {"de", std::string(resource("lang/de.txt"))},
          {"fr", std::string(resource("lang/fr.txt"))},
          {"es", std::string(resource("lang/es.txt"))},
          {"nl", std::string(resource("lang/nl.txt"))},
      },
      Options{});
  return detector;
}

std::vector<std::string> LanguageDetector::languages() const {
  std::vector<std::string> out;
  for (const auto& p : profiles_) out.push_back(p.code);
  return out;
}

std::map<std::string, double> LanguageDetector::distances(std::string_view text) const {
  auto doc = trigram_profile(text, options_.profile_size);
  std::map<std::string, double> out;
  for (const auto& p : profiles_) {
    double d = 0.0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      auto it = p.rank.find(doc[i]);
      if (it == p.rank.end()) {
        d += static_cast<double>(options_.profile_size);
      } else {
        d += static_cast<double>(it->second > i ? it->second - i : i - it->second);
      }
    }
    out[p.code] = d;
  }
  return out;
}

LanguageGuess LanguageDetector::detect(std::string_view text) const {
  auto body = trim(text);
  if (body.empty()) throw Error("language detection on empty text");
  if (word_letters(body) < options_.min_chars) return {options_.default_language, 0.0};

  auto dist = distances(body);
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  double second_d = std::numeric_limits<double>::infinity();
  for (const auto& p : profiles_) {
    double d = dist[p.code];
    if (d < best_d) {
      second_d = best_d;
      best_d = d;
      best = p.code;
    } else if (d < second_d) {
      second_d = d;
    }
  }
  if (best_d == 0.0 && second_d == 0.0) return {options_.default_language, 0.0};

  auto def = dist.find(options_.default_language);
  if (best != options_.default_language && def != dist.end()) {
    if (def->second - best_d < options_.decision_margin * def->second) {
      return {options_.default_language, 0.0};
    }
  }
  double conf = second_d > 0.0 && std::isfinite(second_d) ? (second_d - best_d) / second_d : 1.0;
  return {best, conf};
}

}  // namespace stereo::ingest
