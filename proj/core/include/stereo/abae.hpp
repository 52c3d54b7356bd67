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
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stereo/embedding.hpp"

namespace stereo::abae {

// Token id marking padding; ignored everywhere.
inline constexpr std::size_t kPad = std::numeric_limits<std::size_t>::max();

struct Config {
  int k = 30;             // aspect count
  int negatives = 20;     // m
  double lambda = 1.0;    // orthogonality weight
  int max_len = 70;       // tokens kept per sentence
  int epochs = 50;
  double lr = 0.01;
  double epsilon = 1e-7;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 0;     // 0: 10 below 10k sentences, else 32
  int kmeans_iterations = 20;
  std::uint64_t seed = 42;
};

void validate(const Config& c);
int effective_batch_size(const Config& c, std::size_t sentences);

nlohmann::json to_json(const Config& c);
Config config_from_json(const nlohmann::json& j);

struct Parameters {
  std::vector<std::string> words;
  Eigen::MatrixXd E;  // |V| x d, frozen
  Eigen::MatrixXd M;  // d x d
  Eigen::MatrixXd W;  // K x d
  Eigen::VectorXd b;  // K
  Eigen::MatrixXd T;  // K x d

  int k() const { return static_cast<int>(T.rows()); }
  int dim() const { return static_cast<int>(E.cols()); }
};

// Word vectors of a sentence, one row per non-pad token.
Eigen::MatrixXd gather(const Eigen::MatrixXd& E, const std::vector<std::size_t>& ids);

// a = softmax(e_i · M · y) with y the mean word vector. Throws Error for an
// empty sentence.
Eigen::VectorXd attention_weights(const Eigen::MatrixXd& words, const Eigen::MatrixXd& M);
// z = Σ a_i e_i. Throws Error on a length mismatch.
Eigen::VectorXd sentence_embedding(const Eigen::MatrixXd& words, const Eigen::VectorXd& a);

struct Forward {
  Eigen::VectorXd p;  // aspect distribution
  Eigen::VectorXd r;  // reconstruction
};
Forward aspect_forward(const Eigen::VectorXd& z, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                       const Eigen::MatrixXd& T);

// Σ_j max(0, 1 - r·z + r·n_j) over the rows n_j of `negatives`.
double hinge_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& r, const Eigen::MatrixXd& negatives);
// ‖T_n T_nᵀ - I‖_F with T_n the row-normalised aspect matrix.
double orthogonality(const Eigen::MatrixXd& T);
double loss(const Eigen::VectorXd& z, const Eigen::VectorXd& r, const Eigen::MatrixXd& negatives,
            const Eigen::MatrixXd& T, double lambda);

struct Gradients {
  Eigen::MatrixXd M;
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Eigen::MatrixXd T;

  static Gradients zeros_like(const Parameters& p);
};

// Mean hinge loss over a batch plus λ·U. `negatives[s]` holds the negative
// sentence vectors of batch sentence s. Gradients are written when `g` is
// given.
double batch_loss(const Parameters& params, const std::vector<const std::vector<std::size_t>*>& batch,
                  const std::vector<Eigen::MatrixXd>& negatives, double lambda, Gradients* g = nullptr);

// k-means++ seeding followed by Lloyd iterations over the rows of X.
// Throws Error when k exceeds the number of rows.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& X, int k, int iterations, std::uint64_t seed);

struct TrainResult {
  Parameters params;           // from the epoch with the smallest loss
  std::vector<double> epoch_loss;
  std::vector<double> epoch_orthogonality;
  double initial_orthogonality = 0.0;
  int best_epoch = 0;           // 0-based
  std::size_t skipped_sentences = 0;  // no in-vocabulary token
};

// `corpus` holds embedding row ids (see encode_sentences).
TrainResult train(const Config& config, const std::vector<std::vector<std::size_t>>& corpus,
                  const embed::Embedding& embedding);

// Tokens to embedding row ids; unknown words are dropped and sentences are
// truncated to max_len.
std::vector<std::vector<std::size_t>> encode_sentences(const std::vector<std::vector<std::string>>& sentences,
                                                       const std::vector<std::string>& words, int max_len);

struct Assignment {
  bool no_signal = false;  // sentence has no in-vocabulary word
  Eigen::VectorXd p;
  int aspect = -1;
};

// Argmax of p, ties resolved to the lowest aspect id.
Assignment infer(const Parameters& params, const std::vector<std::size_t>& ids);

struct RankedWord {
  std::string word;
  double similarity = 0.0;
};

// Per aspect, the top_n words by cosine similarity between the aspect row
// and the word vectors.
std::vector<std::vector<RankedWord>> representative_words(const Parameters& params, std::size_t top_n);

std::uint32_t file_crc32(const std::filesystem::path& path);

// Model directory: model.json (config, embedding path and CRC-32, parameter
// arrays with shapes) and labels.json ({aspect_id: label}).
void save_model(const std::filesystem::path& dir, const Parameters& params, const Config& config,
                const std::filesystem::path& embedding_path);
struct Model {
  Config config;
  Parameters params;
  std::filesystem::path embedding_path;
};
// Reloads the embedding and verifies its checksum.
Model load_model(const std::filesystem::path& dir);

void save_labels(const std::filesystem::path& dir, const std::map<int, std::string>& labels);
std::map<int, std::string> load_labels(const std::filesystem::path& dir);

}  // namespace stereo::abae
