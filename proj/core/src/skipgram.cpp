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

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "stereo/embedding.hpp"
#include "stereo/error.hpp"

namespace stereo::embed {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -log σ(x), stable for large |x|.
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

}  // namespace

void validate(const SkipGramConfig& c) {
  if (c.dim <= 0) throw ConfigError("embedding dimension must be positive");
  if (c.window <= 0) throw ConfigError("window must be positive");
  if (c.negatives < 0) throw ConfigError("negative sample count must not be negative");
  if (c.epochs <= 0) throw ConfigError("epochs must be positive");
  if (!(c.lr > 0)) throw ConfigError("learning rate must be positive");
  if (c.threads == 0) throw ConfigError("threads must be positive");
}

std::vector<std::pair<std::size_t, std::size_t>> context_pairs(std::size_t n, int window) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto w = static_cast<std::size_t>(window);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t lo = c >= w ? c - w : 0;
    std::size_t hi = std::min(n - 1, c + w);
    for (std::size_t o = lo; o <= hi; ++o) {
      if (o != c) out.emplace_back(c, o);
    }
  }
  return out;
}

double sgns_pair_loss(const Eigen::MatrixXd& in, const Eigen::MatrixXd& out, std::size_t center, std::size_t context,
                      const std::vector<std::size_t>& negatives, Eigen::MatrixXd* g_in, Eigen::MatrixXd* g_out) {
  auto c = static_cast<Eigen::Index>(center);
  auto v = in.row(c);
  auto o = static_cast<Eigen::Index>(context);
  double x = out.row(o).dot(v);
  double loss = neg_log_sigmoid(x);
  if (g_in) g_in->row(c) += -(1.0 - sigmoid(x)) * out.row(o);
  if (g_out) g_out->row(o) += -(1.0 - sigmoid(x)) * v;
  for (std::size_t k : negatives) {
    auto kk = static_cast<Eigen::Index>(k);
    double xk = out.row(kk).dot(v);
    loss += neg_log_sigmoid(-xk);
    if (g_in) g_in->row(c) += sigmoid(xk) * out.row(kk);
    if (g_out) g_out->row(kk) += sigmoid(xk) * v;
  }
  return loss;
}

SkipGramResult train_skipgram(const std::vector<std::vector<std::size_t>>& corpus, const Vocabulary& vocab,
                              const SkipGramConfig& config) {
  validate(config);
  if (vocab.size() == 0) throw Error("empty vocabulary");
  const auto V = static_cast<Eigen::Index>(vocab.size());
  const int d = config.dim;

  std::mt19937_64 init_rng(config.seed);
  std::uniform_real_distribution<double> init(-0.5 / d, 0.5 / d);
  Eigen::MatrixXd in(V, d);
  for (Eigen::Index i = 0; i < V; ++i) {
    for (int j = 0; j < d; ++j) in(i, j) = init(init_rng);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(V, d);

  std::vector<double> weights;
  for (auto n : vocab.counts()) weights.push_back(std::pow(static_cast<double>(n), 0.75));

  std::uint64_t tokens = 0;
  for (const auto& s : corpus) tokens += s.size();
  const double total = std::max<double>(1.0, static_cast<double>(tokens) * config.epochs);
  std::atomic<std::uint64_t> processed{0};

  SkipGramResult result;
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(corpus.size())));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> loss(threads, 0.0);
    std::vector<std::uint64_t> pairs(threads, 0);
    // Workers update shared rows without locks; with one thread the run is
    // bit-reproducible.
    auto work = [&](unsigned t) {
      std::mt19937_64 rng(config.seed + 7919ULL * static_cast<std::uint64_t>(epoch + 1) + t);
      std::discrete_distribution<std::size_t> noise(weights.begin(), weights.end());
      Eigen::RowVectorXd grad(d);
      for (std::size_t si = t; si < corpus.size(); si += threads) {
        const auto& s = corpus[si];
        double lr = config.lr * std::max(1e-4, 1.0 - static_cast<double>(processed.load()) / total);
        for (auto [ci, oi] : context_pairs(s.size(), config.window)) {
          auto c = static_cast<Eigen::Index>(s[ci]);
          auto o = static_cast<Eigen::Index>(s[oi]);
          grad.setZero();
          double x = out.row(o).dot(in.row(c));
          double g = 1.0 - sigmoid(x);
          loss[t] += neg_log_sigmoid(x);
          grad -= g * out.row(o);
          out.row(o) += lr * g * in.row(c);
          for (int k = 0; k < config.negatives; ++k) {
            auto n = static_cast<Eigen::Index>(noise(rng));
            if (n == o) continue;
            double xn = out.row(n).dot(in.row(c));
            double gn = sigmoid(xn);
            loss[t] += neg_log_sigmoid(-xn);
            grad += gn * out.row(n);
            out.row(n) -= lr * gn * in.row(c);
          }
          in.row(c) -= lr * grad;
          ++pairs[t];
        }
        processed += s.size();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    double sum = 0;
    std::uint64_t n = 0;
    for (unsigned t = 0; t < threads; ++t) {
      sum += loss[t];
      n += pairs[t];
    }
    result.epoch_loss.push_back(n == 0 ? 0.0 : sum / static_cast<double>(n));
  }
  result.embedding.words = vocab.words();
  result.embedding.vectors = std::move(in);
  return result;
}

}  // namespace stereo::embed
