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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stereo/abae.hpp"
#include "stereo/analytics.hpp"
#include "stereo/embedding.hpp"
#include "stereo/session.hpp"

namespace stereo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitConfigError = 2;

// Runs `body` and maps exceptions to exit codes: ConfigError -> 2, any other
// failure -> 1. The message goes to `err`.
int guarded(const std::function<void()>& body, std::ostream& err);

// min(requested, STEREO_THREADS) when the variable is set; at least 1.
unsigned thread_budget(unsigned requested);

// Writes `<output>.prov.json` describing how `output` was produced. Inputs
// are recorded with their CRC-32.
void write_provenance(const std::filesystem::path& output, const std::string& stage, std::uint64_t seed,
                      const std::map<std::string, std::filesystem::path>& inputs, const nlohmann::json& params);

struct IngestConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;  // sentences, JSON lines
  bool keep_all = false;
  unsigned threads = 1;
};
ingest::IngestReport run_ingest(const IngestConfig& c);

struct ExtractConfig {
  std::optional<std::filesystem::path> corpus;     // one of corpus / sentences
  std::optional<std::filesystem::path> sentences;
  std::optional<std::filesystem::path> rules;      // bundled starter pack when unset
  std::filesystem::path out;                       // records, JSON lines
  std::optional<std::filesystem::path> statistic_sentences_out;
  unsigned threads = 1;
};
struct ExtractResult {
  std::size_t sentences = 0;
  std::size_t statistic_sentences = 0;
  std::size_t covered = 0;
  std::vector<analytics::RecordRow> records;
  analytics::Summary summary;
  ingest::IngestReport ingest;
};
ExtractResult run_extract(const ExtractConfig& c);

struct ConditionsConfig {
  std::filesystem::path records;
  std::optional<std::filesystem::path> conllu;  // a missing file yields no_parse everywhere
  std::optional<std::filesystem::path> grammar;
  std::filesystem::path out;
  std::optional<std::filesystem::path> emit_clean;  // parser input, one sentence per line
};
struct ConditionsResult {
  std::size_t sentences = 0;
  std::size_t parsed = 0;
  std::size_t with_conditions = 0;
};
ConditionsResult run_conditions(const ConditionsConfig& c);

struct EmbedConfig {
  std::filesystem::path sentences;
  std::filesystem::path out;
  embed::SkipGramConfig skipgram;
  std::uint64_t min_count = 5;
};
struct EmbedResult {
  std::size_t vocabulary = 0;
  double coverage = 0.0;
  std::vector<double> epoch_loss;
};
EmbedResult run_embed(const EmbedConfig& c);

struct AbaeTrainConfig {
  std::filesystem::path sentences;
  std::filesystem::path embedding;
  std::filesystem::path out;  // model directory
  abae::Config abae;
};
abae::TrainResult run_abae_train(const AbaeTrainConfig& c);

struct AbaeInferConfig {
  std::filesystem::path model;
  std::filesystem::path sentences;
  std::filesystem::path out;
};
std::size_t run_abae_infer(const AbaeInferConfig& c);

void run_abae_words(const std::filesystem::path& model, std::size_t top, std::ostream& out);

struct AnalyzeConfig {
  std::filesystem::path records;
  std::filesystem::path out;  // directory
  std::size_t sample_per_stratum = 200;
  std::uint64_t seed = 42;
  // Coverage of these sentences is reported when given; rules default to
  // the starter pack.
  std::optional<std::filesystem::path> sentences;
  std::optional<std::filesystem::path> rules;
};
analytics::Summary run_analyze(const AnalyzeConfig& c);

struct LearnConfig {
  std::filesystem::path corpus;
  std::filesystem::path session;
  std::optional<std::filesystem::path> rules;  // initial rule sets for a new session
  session::Session::Options options;
};
// Line-oriented review loop: next, test <json>, accept <json>, skip,
// metrics, export <file>, quit.
void run_learn_prompt(session::Session& s, std::istream& in, std::ostream& out);

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  std::optional<std::filesystem::path> rules;
  std::optional<std::filesystem::path> conllu;
  std::optional<std::filesystem::path> grammar;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  embed::SkipGramConfig skipgram;
  std::uint64_t min_count = 5;
  abae::Config abae;
  std::size_t sample_per_stratum = 200;
};
// Runs every stage into `out`. A failing stage stops the run; pipeline.json
// records which stages completed.
void run_pipeline(const PipelineConfig& c, std::ostream& log);

}  // namespace stereo::cli
