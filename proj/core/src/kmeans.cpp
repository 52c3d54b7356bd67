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

#include <random>

#include "stereo/abae.hpp"
#include "stereo/error.hpp"

namespace stereo::abae {

Eigen::MatrixXd kmeans(const Eigen::MatrixXd& X, int k, int iterations, std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (k <= 0) throw ConfigError("k-means needs k >= 1");
  if (k > n) throw Error("k-means: k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd C(k, X.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  C.row(0) = X.row(first(rng));
  Eigen::VectorXd dist(n);
  for (Eigen::Index i = 0; i < n; ++i) dist(i) = (X.row(i) - C.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = dist.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      double acc = 0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist(i);
        if (acc >= target && dist(i) > 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    C.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) dist(i) = std::min(dist(i), (X.row(i) - C.row(c)).squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (X.row(i) - C.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (X.row(i) - C.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
      ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    // An emptied cluster keeps its previous centroid.
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) C.row(c) = sum.row(c) / count[static_cast<std::size_t>(c)];
    }
  }
  return C;
}

}  // namespace stereo::abae
