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
#include <random>
#include <unordered_map>

#include "stereo/abae.hpp"
#include "stereo/error.hpp"

namespace stereo::abae {

void validate(const Config& c) {
  if (c.k < 1) throw ConfigError("aspect count k must be >= 1");
  if (c.negatives < 1) throw ConfigError("negative samples m must be >= 1");
  if (c.lambda < 0) throw ConfigError("lambda must be >= 0");
  if (c.max_len < 1) throw ConfigError("max_len must be >= 1");
  if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(c.lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(c.epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (c.batch_size < 0) throw ConfigError("batch size must be >= 0");
  if (c.kmeans_iterations < 0) throw ConfigError("k-means iterations must be >= 0");
}

int effective_batch_size(const Config& c, std::size_t sentences) {
  if (c.batch_size > 0) return c.batch_size;
  return sentences < 10000 ? 10 : 32;
}

nlohmann::json to_json(const Config& c) {
  return {{"k", c.k},         {"negatives", c.negatives}, {"lambda", c.lambda},   {"max_len", c.max_len},
          {"epochs", c.epochs}, {"lr", c.lr},             {"epsilon", c.epsilon}, {"beta1", c.beta1},
          {"beta2", c.beta2}, {"batch_size", c.batch_size}, {"kmeans_iterations", c.kmeans_iterations},
          {"seed", c.seed}};
}

Config config_from_json(const nlohmann::json& j) {
  Config c;
  c.k = j.value("k", c.k);
  c.negatives = j.value("negatives", c.negatives);
  c.lambda = j.value("lambda", c.lambda);
  c.max_len = j.value("max_len", c.max_len);
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.kmeans_iterations = j.value("kmeans_iterations", c.kmeans_iterations);
  c.seed = j.value("seed", c.seed);
  validate(c);
  return c;
}

std::vector<std::vector<std::size_t>> encode_sentences(const std::vector<std::vector<std::string>>& sentences,
                                                       const std::vector<std::string>& words, int max_len) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    for (const auto& t : s) {
      if (static_cast<int>(ids.size()) >= max_len) break;
      if (auto it = index.find(t); it != index.end()) ids.push_back(it->second);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

namespace {

struct Adam {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;

  explicit Adam(const Eigen::MatrixXd& like)
      : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())), v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, const Config& c, long t) {
    m = c.beta1 * m + (1 - c.beta1) * grad;
    v = c.beta2 * v + (1 - c.beta2) * grad.cwiseProduct(grad);
    double lr_t = c.lr * std::sqrt(1 - std::pow(c.beta2, t)) / (1 - std::pow(c.beta1, t));
    param.array() -= lr_t * m.array() / (v.array().sqrt() + c.epsilon);
  }
};

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace

TrainResult train(const Config& config, const std::vector<std::vector<std::size_t>>& corpus,
                  const embed::Embedding& embedding) {
  validate(config);
  if (embedding.vectors.rows() == 0) throw Error("empty embedding");
  TrainResult result;
  const auto V = static_cast<std::size_t>(embedding.vectors.rows());

  std::vector<std::vector<std::size_t>> sentences;
  for (const auto& s : corpus) {
    std::vector<std::size_t> ids;
    for (std::size_t id : s) {
      if (id != kPad && id < V && static_cast<int>(ids.size()) < config.max_len) ids.push_back(id);
    }
    if (ids.empty()) {
      ++result.skipped_sentences;
    } else {
      sentences.push_back(std::move(ids));
    }
  }
  if (sentences.empty()) throw Error("no training sentence has an in-vocabulary word");

  Parameters p;
  p.words = embedding.words;
  p.E = embedding.vectors;
  const Eigen::Index d = p.E.cols();
  std::mt19937_64 rng(config.seed);
  p.M = uniform(d, d, rng);
  p.W = uniform(config.k, d, rng);
  p.b = uniform(config.k, 1, rng).col(0);
  p.T = kmeans(p.E, config.k, config.kmeans_iterations, config.seed);
  result.initial_orthogonality = orthogonality(p.T);

  Eigen::MatrixXd means(static_cast<Eigen::Index>(sentences.size()), d);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    means.row(static_cast<Eigen::Index>(i)) = gather(p.E, sentences[i]).colwise().mean();
  }

  Adam aM(p.M), aW(p.W), ab(p.b), aT(p.T);
  const auto batch_size = static_cast<std::size_t>(effective_batch_size(config, sentences.size()));
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uniform_int_distribution<std::size_t> pick(0, sentences.size() - 1);
  double best = std::numeric_limits<double>::infinity();
  long step = 0;
  Gradients g;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<const std::vector<std::size_t>*> batch;
      std::vector<Eigen::MatrixXd> negs;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&sentences[order[i]]);
        Eigen::MatrixXd n(config.negatives, d);
        for (int j = 0; j < config.negatives; ++j) n.row(j) = means.row(static_cast<Eigen::Index>(pick(rng)));
        negs.push_back(std::move(n));
      }
      sum += batch_loss(p, batch, negs, config.lambda, &g);
      ++batches;
      ++step;
      aM.step(p.M, g.M, config, step);
      aW.step(p.W, g.W, config, step);
      Eigen::MatrixXd bm = p.b;
      ab.step(bm, g.b, config, step);
      p.b = bm.col(0);
      aT.step(p.T, g.T, config, step);
    }
    double epoch_loss = sum / static_cast<double>(batches);
    result.epoch_loss.push_back(epoch_loss);
    result.epoch_orthogonality.push_back(orthogonality(p.T));
    if (epoch_loss < best) {
      best = epoch_loss;
      result.best_epoch = epoch;
      result.params = p;
    }
  }
  return result;
}

}  // namespace stereo::abae
