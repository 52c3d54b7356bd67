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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereo/text.hpp"

namespace stereo::ingest {

struct Document {
  std::string doc_id;
  std::string title;
  std::vector<std::string> paragraphs;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;  // ordinal within the document
  std::string text;
  bool has_digit = false;
  bool language_ok = true;
  std::string language = "en";
};

// Sentence boundaries are matches of `\.\s?[A-Z]`: the period closes the left
// sentence, the optional whitespace is dropped and the capital letter opens
// the right sentence. The returned spans plus the dropped separators
// partition the block.
std::vector<Span> sentence_spans(std::string_view block);
std::vector<std::string> split_sentences(std::string_view block);

// Parses `{"doc_id": str, "title": str, "body": [str, ...]}`.
Document parse_document(std::string_view json_text);
Document load_document(const std::filesystem::path& path);

struct LanguageGuess {
  std::string code;
  double confidence = 0.0;  // 0 when the default was applied
};

// Character-trigram rank-profile classifier (out-of-place distance).
class LanguageDetector {
 public:
  struct Options {
    std::size_t profile_size = 300;
    // Texts with fewer letters than this (counting words of two or more
    // letters) are classified as the default.
    std::size_t min_chars = 20;
    // A non-default language must beat the default by this relative margin.
    double decision_margin = 0.03;
    std::string default_language = "en";
  };

  // samples: (language code, sample text) pairs.
  LanguageDetector(const std::vector<std::pair<std::string, std::string>>& samples,
                   Options options);

  // Profiles built from the bundled en/de/fr/es/nl sample texts.
  static const LanguageDetector& bundled();

  // Throws Error on empty (after trim) input.
  LanguageGuess detect(std::string_view text) const;

  // Out-of-place distance of `text` to each profile, for diagnostics.
  std::map<std::string, double> distances(std::string_view text) const;

  std::vector<std::string> languages() const;

 private:
  struct Profile {
    std::string code;
    std::map<std::u32string, std::size_t> rank;
  };

  Options options_;
  std::vector<Profile> profiles_;
};

// Ranked trigram list of a text (most frequent first, ties lexicographic).
std::vector<std::u32string> trigram_profile(std::string_view text, std::size_t limit);

// Splits a document into sentences and annotates digit/language flags.
// Sentences are trimmed; whitespace-only sentences are dropped.
std::vector<Sentence> document_sentences(const Document& doc, const LanguageDetector& lang);

struct IngestIssue {
  std::string file;
  std::string message;
};

struct IngestReport {
  std::size_t files = 0;
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t with_digit = 0;
  std::size_t language_rejected = 0;
  std::size_t candidates = 0;
  std::vector<IngestIssue> skipped;

  double candidate_fraction() const {
    return sentences == 0 ? 0.0 : static_cast<double>(candidates) / static_cast<double>(sentences);
  }
};

// Document files of a corpus directory (*.json), in filename order.
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir);

// Lazily walks a corpus directory and yields candidate sentences (digit
// bearing and English) in document order. Unreadable or malformed files are
// recorded in the report and skipped.
class CandidateStream {
 public:
  explicit CandidateStream(const std::filesystem::path& dir,
                           const LanguageDetector& lang = LanguageDetector::bundled());

  std::optional<Sentence> next();
  const IngestReport& report() const { return report_; }

 private:
  bool load_next_document();

  const LanguageDetector& lang_;
  std::vector<std::filesystem::path> files_;
  std::size_t file_pos_ = 0;
  std::vector<Sentence> buffer_;
  std::size_t buffer_pos_ = 0;
  std::map<std::string, std::string> seen_ids_;
  IngestReport report_;
};

struct IngestOptions {
  bool keep_all = false;  // also return non-candidate sentences
  unsigned threads = 1;
};

// Parallel variant of CandidateStream; output order equals document order.
std::vector<Sentence> ingest_corpus(const std::filesystem::path& dir, const IngestOptions& options,
                                    IngestReport& report,
                                    const LanguageDetector& lang = LanguageDetector::bundled());

nlohmann::json to_json(const Sentence& s);
Sentence sentence_from_json(const nlohmann::json& j);

// Newline-delimited sentence records.
void write_sentences(const std::filesystem::path& path, const std::vector<Sentence>& sentences);
std::vector<Sentence> read_sentences(const std::filesystem::path& path);

}  // namespace stereo::ingest
