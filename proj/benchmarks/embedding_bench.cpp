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

#include <benchmark/benchmark.h>

#include <random>

#include "stereo/embedding.hpp"

namespace {

using namespace stereo::embed;

void BM_SkipGramEpoch(benchmark::State& state) {
  const auto vocab_size = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::vector<std::vector<std::string>> corpus(2000);
  for (auto& s : corpus) {
    for (int i = 0; i < 15; ++i) s.push_back("w" + std::to_string(rng() % vocab_size));
  }
  auto vocab = build_vocab(corpus, 1);
  auto ids = encode(corpus, vocab);
  SkipGramConfig c;
  c.dim = 100;
  c.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_skipgram(ids, vocab, c).epoch_loss);
  state.SetItemsProcessed(state.iterations() * 2000 * 15);
}
BENCHMARK(BM_SkipGramEpoch)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  const std::string text =
      "Participants who received the follow-up dose (n = 120) reported fewer COVID-19 symptoms than controls.";
  for (auto _ : state) benchmark::DoNotOptimize(preprocess(text));
}
BENCHMARK(BM_Tokenize);

}  // namespace
