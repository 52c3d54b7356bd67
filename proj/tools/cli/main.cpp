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

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cli.hpp"
#include "stereo/error.hpp"
#include "stereo/session_server.hpp"

namespace {

namespace fs = std::filesystem;
using namespace stereo;

session::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

template <class T>
std::optional<T> opt(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return T(value);
}

void add_skipgram_flags(CLI::App* cmd, embed::SkipGramConfig& c, std::uint64_t& min_count) {
  cmd->add_option("--dim", c.dim, "Embedding dimension")->capture_default_str();
  cmd->add_option("--window", c.window, "Context window")->capture_default_str();
  cmd->add_option("--neg", c.negatives, "Negative samples per pair")->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", c.lr, "Initial learning rate (linear decay)")->capture_default_str();
  cmd->add_option("--min-count", min_count, "Minimum word frequency")->capture_default_str();
}

void add_abae_flags(CLI::App* cmd, abae::Config& c) {
  cmd->add_option("--k", c.k, "Number of aspects")->capture_default_str();
  cmd->add_option("--negatives", c.negatives, "Negative sentences per input sentence")->capture_default_str();
  cmd->add_option("--lambda", c.lambda, "Orthogonality weight")->capture_default_str();
  cmd->add_option("--max-len", c.max_len, "Tokens kept per sentence")->capture_default_str();
  cmd->add_option("--abae-epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--abae-lr", c.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "Batch size (0 picks by corpus size)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistic report extraction, condition extraction and topic modelling for scientific text"};
  app.require_subcommand(1);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Worker threads (capped by STEREO_THREADS)");

  std::function<void()> action;

  // ingest
  cli::IngestConfig ingest_cfg;
  auto* ingest = app.add_subcommand("ingest", "Split a corpus into candidate sentences");
  ingest->add_option("--corpus", ingest_cfg.corpus, "Directory of JSON documents")->required();
  ingest->add_option("--out", ingest_cfg.out, "Output sentences (JSON lines)")->required();
  ingest->add_flag("--keep-all", ingest_cfg.keep_all, "Also keep sentences without digits or in other languages");
  ingest->callback([&] {
    action = [&] {
      ingest_cfg.threads = threads;
      auto r = cli::run_ingest(ingest_cfg);
      std::cout << r.documents << " documents, " << r.sentences << " sentences, " << r.candidates << " candidates, "
                << r.skipped.size() << " files skipped\n";
      for (const auto& s : r.skipped) std::cerr << "skipped " << s.file << ": " << s.message << '\n';
    };
  });

  // learn
  cli::LearnConfig learn_cfg;
  std::string learn_rules;
  bool serve = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* learn = app.add_subcommand("learn", "Author rules interactively over a corpus");
  learn->add_option("--corpus", learn_cfg.corpus, "Directory of JSON documents")->required();
  learn->add_option("--session", learn_cfg.session, "Session directory (created or resumed)")->required();
  learn->add_option("--rules", learn_rules, "Initial rule sets for a new session (default: starter pack)");
  learn->add_option("--heldout", learn_cfg.options.heldout_size, "Held-out sample size")->capture_default_str();
  learn->add_option("--sample", learn_cfg.options.sample_size, "Corpus sample size for dry runs")->capture_default_str();
  learn->add_option("--seed", learn_cfg.options.seed, "Sampling seed")->capture_default_str();
  learn->add_flag("--serve", serve, "Serve the HTTP API instead of the prompt");
  learn->add_option("--host", host, "HTTP bind address")->capture_default_str();
  learn->add_option("--port", port, "HTTP port (0 picks a free port)")->capture_default_str();
  learn->callback([&] {
    action = [&] {
      auto initial = learn_rules.empty() ? rules::starter_rulesets() : rules::load_rulesets(learn_rules);
      learn_cfg.options.threads = cli::thread_budget(threads);
      session::Session s(learn_cfg.corpus, learn_cfg.session, initial, learn_cfg.options);
      if (serve) {
        session::Server server(s);
        int bound = server.bind(host, port);
        std::cout << "listening on http://" << host << ':' << bound << std::endl;
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        server.listen();
        g_server = nullptr;
      } else {
        cli::run_learn_prompt(s, std::cin, std::cout);
      }
    };
  });

  // extract
  cli::ExtractConfig extract_cfg;
  std::string ex_corpus, ex_sentences, ex_rules, ex_stat;
  auto* extract = app.add_subcommand("extract", "Apply rule sets and write statistic records");
  auto* ex_c = extract->add_option("--corpus", ex_corpus, "Directory of JSON documents");
  auto* ex_s = extract->add_option("--sentences", ex_sentences, "Sentences file from `ingest`");
  ex_c->excludes(ex_s);
  extract->add_option("--rules", ex_rules, "Rule sets file (default: starter pack)");
  extract->add_option("--out", extract_cfg.out, "Output records (JSON lines)")->required();
  extract->add_option("--statistic-sentences", ex_stat, "Also write the sentences that yielded records");
  extract->callback([&] {
    action = [&] {
      extract_cfg.corpus = opt<fs::path>(ex_corpus);
      extract_cfg.sentences = opt<fs::path>(ex_sentences);
      extract_cfg.rules = opt<fs::path>(ex_rules);
      extract_cfg.statistic_sentences_out = opt<fs::path>(ex_stat);
      extract_cfg.threads = threads;
      auto r = cli::run_extract(extract_cfg);
      std::cout << r.records.size() << " records from " << r.statistic_sentences << " of " << r.sentences
                << " sentences (" << r.covered << " fully covered)\n"
                << analytics::render(r.summary);
    };
  });

  // conditions
  cli::ConditionsConfig cond_cfg;
  std::string cond_conllu, cond_grammar, cond_clean;
  auto* cond = app.add_subcommand("conditions", "Extract experimental conditions from parsed statistic sentences");
  cond->add_option("--records", cond_cfg.records, "Records from `extract`")->required();
  cond->add_option("--conllu", cond_conllu, "Dependency parses (CoNLL-U)");
  cond->add_option("--grammar", cond_grammar, "Grammar rules (default: bundled)");
  cond->add_option("--out", cond_cfg.out, "Output conditions (JSON lines)")->required();
  cond->add_option("--emit-clean", cond_clean, "Write cleaned sentences for an external parser");
  cond->callback([&] {
    action = [&] {
      cond_cfg.conllu = opt<fs::path>(cond_conllu);
      cond_cfg.grammar = opt<fs::path>(cond_grammar);
      cond_cfg.emit_clean = opt<fs::path>(cond_clean);
      if (cond_cfg.conllu && !fs::exists(*cond_cfg.conllu)) {
        std::cerr << "warning: " << *cond_cfg.conllu << " not found, every sentence is reported as no_parse\n";
      }
      auto r = cli::run_conditions(cond_cfg);
      std::cout << r.sentences << " sentences, " << r.parsed << " parsed, " << r.with_conditions
                << " with conditions\n";
    };
  });

  // embed
  cli::EmbedConfig embed_cfg;
  auto* embed_cmd = app.add_subcommand("embed", "Train skip-gram word embeddings");
  embed_cmd->add_option("--sentences", embed_cfg.sentences, "Sentences file")->required();
  embed_cmd->add_option("--out", embed_cfg.out, "Output vectors (text format)")->required();
  embed_cmd->add_option("--seed", embed_cfg.skipgram.seed, "Random seed")->capture_default_str();
  add_skipgram_flags(embed_cmd, embed_cfg.skipgram, embed_cfg.min_count);
  embed_cmd->callback([&] {
    action = [&] {
      embed_cfg.skipgram.threads = threads;
      auto r = cli::run_embed(embed_cfg);
      std::cout << r.vocabulary << " words, token coverage " << r.coverage << ", final loss "
                << (r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back()) << '\n';
    };
  });

  // abae
  auto* abae_cmd = app.add_subcommand("abae", "Attention-based aspect extraction");
  abae_cmd->require_subcommand(1);
  cli::AbaeTrainConfig train_cfg;
  auto* train = abae_cmd->add_subcommand("train", "Train an aspect model");
  train->add_option("--sentences", train_cfg.sentences, "Sentences file")->required();
  train->add_option("--embedding", train_cfg.embedding, "Word vectors from `embed`")->required();
  train->add_option("--out", train_cfg.out, "Model directory")->required();
  train->add_option("--seed", train_cfg.abae.seed, "Random seed")->capture_default_str();
  add_abae_flags(train, train_cfg.abae);
  train->callback([&] {
    action = [&] {
      auto r = cli::run_abae_train(train_cfg);
      std::cout << "best epoch " << r.best_epoch + 1 << " of " << r.epoch_loss.size() << ", loss "
                << r.epoch_loss[static_cast<std::size_t>(r.best_epoch)] << '\n';
    };
  });
  cli::AbaeInferConfig infer_cfg;
  auto* infer = abae_cmd->add_subcommand("infer", "Assign aspects to sentences");
  infer->add_option("--model", infer_cfg.model, "Model directory")->required();
  infer->add_option("--sentences", infer_cfg.sentences, "Sentences file")->required();
  infer->add_option("--out", infer_cfg.out, "Output assignments (JSON lines)")->required();
  infer->callback([&] { action = [&] { std::cout << cli::run_abae_infer(infer_cfg) << " sentences assigned\n"; }; });
  std::string words_model;
  std::size_t top = 10;
  auto* words = abae_cmd->add_subcommand("words", "List representative words per aspect");
  words->add_option("--model", words_model, "Model directory")->required();
  words->add_option("--top", top, "Words per aspect")->capture_default_str();
  words->callback([&] { action = [&] { cli::run_abae_words(words_model, top, std::cout); }; });

  // analyze
  cli::AnalyzeConfig an_cfg;
  std::string an_sentences, an_rules;
  auto* analyze = app.add_subcommand("analyze", "Report tables over extracted records");
  analyze->add_option("--records", an_cfg.records, "Records from `extract`")->required();
  analyze->add_option("--out", an_cfg.out, "Output directory")->required();
  analyze->add_option("--sample", an_cfg.sample_per_stratum, "Review sample size per stratum")->capture_default_str();
  analyze->add_option("--seed", an_cfg.seed, "Sampling seed")->capture_default_str();
  analyze->add_option("--sentences", an_sentences, "Candidate sentences for a coverage figure");
  analyze->add_option("--rules", an_rules, "Rule sets for the coverage figure (default: starter pack)");
  analyze->callback([&] {
    action = [&] {
      an_cfg.sentences = opt<fs::path>(an_sentences);
      an_cfg.rules = opt<fs::path>(an_rules);
      std::cout << analytics::render(cli::run_analyze(an_cfg));
    };
  });

  // pipeline
  cli::PipelineConfig pipe_cfg;
  std::string p_rules, p_conllu, p_grammar;
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  pipeline->add_option("--corpus", pipe_cfg.corpus, "Directory of JSON documents")->required();
  pipeline->add_option("--out", pipe_cfg.out, "Output directory")->required();
  pipeline->add_option("--rules", p_rules, "Rule sets file (default: starter pack)");
  pipeline->add_option("--conllu", p_conllu, "Dependency parses of the statistic sentences");
  pipeline->add_option("--grammar", p_grammar, "Grammar rules (default: bundled)");
  pipeline->add_option("--seed", pipe_cfg.seed, "Seed for every stochastic stage")->capture_default_str();
  pipeline->add_option("--sample", pipe_cfg.sample_per_stratum, "Review sample size per stratum")
      ->capture_default_str();
  add_skipgram_flags(pipeline, pipe_cfg.skipgram, pipe_cfg.min_count);
  add_abae_flags(pipeline, pipe_cfg.abae);
  pipeline->callback([&] {
    action = [&] {
      pipe_cfg.rules = opt<fs::path>(p_rules);
      pipe_cfg.conllu = opt<fs::path>(p_conllu);
      pipe_cfg.grammar = opt<fs::path>(p_grammar);
      pipe_cfg.threads = threads;
      cli::run_pipeline(pipe_cfg, std::cout);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfigError;
  }
  return cli::guarded([&] { action(); }, std::cerr);
}
