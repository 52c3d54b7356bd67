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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace stereo::embed {

// Lowercased word tokens. Splits on anything that is not a letter or digit,
// keeps hyphens between two word characters ("covid-19", "follow-up") and
// drops tokens without a letter.
std::vector<std::string> tokenize(std::string_view text);

const std::set<std::string>& stopwords();

// Lookup-table lemmatizer with a small set of English suffix rules as fallback.
class Lemmatizer {
 public:
  explicit Lemmatizer(std::map<std::string, std::string> table);
  static const Lemmatizer& bundled();

  std::string lemma(const std::string& word) const;

 private:
  std::map<std::string, std::string> table_;
};

// tokenize, drop stopwords, lemmatize.
std::vector<std::string> preprocess(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts);

  std::size_t size() const { return words_.size(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::uint64_t count(std::size_t i) const { return counts_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::optional<std::size_t> find(const std::string& word) const;

  // Corpus tokens kept by the min-count filter, as a fraction of all tokens.
  double coverage = 0.0;
  std::uint64_t min_count = 1;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Words with frequency >= min_count, ordered by descending frequency then
// lexicographically. Throws Error on an empty corpus.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::uint64_t min_count);

// Maps tokens to vocabulary ids, dropping unknown words.
std::vector<std::vector<std::size_t>> encode(const std::vector<std::vector<std::string>>& corpus,
                                             const Vocabulary& vocab);

struct Embedding {
  std::vector<std::string> words;
  Eigen::MatrixXd vectors;  // one row per word

  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  std::optional<std::size_t> find(const std::string& word) const;
};

// Text vectors format: header "|V| d", then "word v1 ... vd" per line.
void save_embedding(const std::filesystem::path& path, const Embedding& e);
Embedding load_embedding(const std::filesystem::path& path);

struct SkipGramConfig {
  int dim = 200;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
  unsigned threads = 1;  // >1 trains Hogwild-style and is not bit-reproducible
};

// Throws ConfigError for non-positive sizes or learning rate.
void validate(const SkipGramConfig& c);

// (center, context) positions of a sentence of length n with a fixed window.
std::vector<std::pair<std::size_t, std::size_t>> context_pairs(std::size_t n, int window);

// Negative-sampling loss of one (center, context) pair:
//   -log σ(u_o·v_c) - Σ_k log σ(-u_k·v_c)
// where v are rows of `in` and u rows of `out`. Gradients are accumulated
// into g_in / g_out when given.
double sgns_pair_loss(const Eigen::MatrixXd& in, const Eigen::MatrixXd& out, std::size_t center, std::size_t context,
                      const std::vector<std::size_t>& negatives, Eigen::MatrixXd* g_in = nullptr,
                      Eigen::MatrixXd* g_out = nullptr);

struct SkipGramResult {
  Embedding embedding;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

SkipGramResult train_skipgram(const std::vector<std::vector<std::size_t>>& corpus, const Vocabulary& vocab,
                              const SkipGramConfig& config);

}  // namespace stereo::embed
