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

#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "stereo/conllu.hpp"
#include "stereo/error.hpp"
#include "stereo/gbce.hpp"
#include "stereo/text.hpp"

#ifndef STEREO_VERSION
#define STEREO_VERSION "dev"
#endif

namespace stereo::cli {

namespace fs = std::filesystem;

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitStageFailure;
  }
}

unsigned thread_budget(unsigned requested) {
  unsigned n = std::max(1u, requested);
  if (const char* env = std::getenv("STEREO_THREADS")) {
    try {
      long cap = std::stol(env);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      throw ConfigError(std::string("STEREO_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return n;
}

namespace {

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

void require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) throw ConfigError(what + " is not a directory: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

rules::RuleSets load_rules_or_starter(const std::optional<fs::path>& path) {
  if (!path) return rules::starter_rulesets();
  require_file(*path, "rules file");
  try {
    return rules::load_rulesets(*path);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("invalid rules file: ") + e.what());
  } catch (const RuleError& e) {
    throw ConfigError("invalid rule '" + e.rule_id() + "': " + e.what());
  }
}

std::vector<std::vector<std::string>> tokenized(const std::vector<ingest::Sentence>& sentences) {
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(embed::preprocess(s.text));
  return out;
}

nlohmann::json report_json(const ingest::IngestReport& r) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& i : r.skipped) skipped.push_back({{"file", i.file}, {"message", i.message}});
  return {{"files", r.files},
          {"documents", r.documents},
          {"sentences", r.sentences},
          {"with_digit", r.with_digit},
          {"language_rejected", r.language_rejected},
          {"candidates", r.candidates},
          {"skipped", skipped}};
}

}  // namespace

void write_provenance(const fs::path& output, const std::string& stage, std::uint64_t seed,
                      const std::map<std::string, fs::path>& inputs, const nlohmann::json& params) {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [name, path] : inputs) {
    nlohmann::json entry = {{"path", path.string()}};
    if (fs::is_regular_file(path)) entry["crc32"] = abae::file_crc32(path);
    in[name] = entry;
  }
  nlohmann::json j = {{"stage", stage}, {"tool_version", STEREO_VERSION}, {"seed", seed}, {"inputs", in},
                      {"params", params}};
  fs::path prov = output;
  prov += ".prov.json";
  write_file(prov, j.dump(2) + "\n");
}

ingest::IngestReport run_ingest(const IngestConfig& c) {
  require_dir(c.corpus, "corpus");
  ingest::IngestReport report;
  ingest::IngestOptions opts;
  opts.keep_all = c.keep_all;
  opts.threads = thread_budget(c.threads);
  auto sentences = ingest::ingest_corpus(c.corpus, opts, report);
  ensure_parent(c.out);
  ingest::write_sentences(c.out, sentences);
  write_provenance(c.out, "ingest", 0, {{"corpus", c.corpus}},
                   {{"keep_all", c.keep_all}, {"report", report_json(report)}});
  return report;
}

ExtractResult run_extract(const ExtractConfig& c) {
  ExtractResult res;
  std::vector<ingest::Sentence> sentences;
  if (c.corpus) {
    require_dir(*c.corpus, "corpus");
    ingest::IngestOptions opts;
    opts.threads = thread_budget(c.threads);
    sentences = ingest::ingest_corpus(*c.corpus, opts, res.ingest);
  } else if (c.sentences) {
    require_file(*c.sentences, "sentences file");
    sentences = ingest::read_sentences(*c.sentences);
  } else {
    throw ConfigError("extract needs a corpus directory or a sentences file");
  }
  auto rs = load_rules_or_starter(c.rules);
  rules::CompiledRules compiled(rs);

  std::vector<rules::SentenceVerdict> verdicts(sentences.size());
  unsigned threads = std::min<unsigned>(thread_budget(c.threads), std::max<std::size_t>(1, sentences.size()));
  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < sentences.size(); i += threads) {
      verdicts[i] = rules::classify_sentence(sentences[i].text, compiled, sentences[i].doc_id, sentences[i].index);
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  std::vector<ingest::Sentence> statistic;
  res.sentences = sentences.size();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (verdicts[i].status == rules::Status::all_covered) ++res.covered;
    if (verdicts[i].records.empty()) continue;
    statistic.push_back(sentences[i]);
    for (auto& r : verdicts[i].records) {
      res.summary.add(r);
      res.records.push_back({std::move(r), sentences[i].text});
    }
  }
  res.statistic_sentences = statistic.size();

  ensure_parent(c.out);
  analytics::write_records(c.out, res.records);
  std::map<std::string, fs::path> inputs;
  if (c.corpus) inputs["corpus"] = *c.corpus;
  if (c.sentences) inputs["sentences"] = *c.sentences;
  if (c.rules) inputs["rules"] = *c.rules;
  nlohmann::json params = {{"rules_version", rs.version},
                           {"sentences", res.sentences},
                           {"covered", res.covered},
                           {"records", res.records.size()},
                           {"summary", analytics::to_json(res.summary)}};
  if (c.corpus) params["ingest"] = report_json(res.ingest);
  write_provenance(c.out, "extract", 0, inputs, params);
  if (c.statistic_sentences_out) {
    ensure_parent(*c.statistic_sentences_out);
    ingest::write_sentences(*c.statistic_sentences_out, statistic);
    write_provenance(*c.statistic_sentences_out, "extract", 0, inputs, {{"sentences", statistic.size()}});
  }
  return res;
}

ConditionsResult run_conditions(const ConditionsConfig& c) {
  require_file(c.records, "records file");
  auto grammar = gbce::bundled_grammar_rules();
  if (c.grammar) {
    require_file(*c.grammar, "grammar rules file");
    try {
      grammar = gbce::load_grammar_rules(*c.grammar);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("invalid grammar rules: ") + e.what());
    }
  }
  gbce::ParseIndex parses;
  if (c.conllu && fs::is_regular_file(*c.conllu)) parses = gbce::index_by_sentence(gbce::load_conllu(*c.conllu));

  auto rows = analytics::read_records(c.records);
  // Records grouped per sentence, in first-appearance order.
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::pair<std::string, std::size_t>, std::pair<std::string, std::vector<rules::StatisticRecord>>> groups;
  for (auto& row : rows) {
    auto key = std::make_pair(row.record.doc_id, row.record.sentence_index);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) {
      order.push_back(key);
      it->second.first = row.sentence;
    }
    it->second.second.push_back(std::move(row.record));
  }

  ConditionsResult res;
  std::string out;
  std::string clean_lines;
  for (const auto& key : order) {
    const auto& [sentence, records] = groups.at(key);
    auto pit = parses.find(key);
    const gbce::ParsedSentence* parsed = pit == parses.end() ? nullptr : &pit->second;
    auto r = gbce::extract_conditions(sentence, records, parsed, grammar);
    ++res.sentences;
    if (r.outcome == gbce::Outcome::ok) ++res.parsed;
    if (!r.set.conditions.empty()) ++res.with_conditions;
    nlohmann::json j = {{"doc_id", key.first},
                        {"sentence_index", key.second},
                        {"outcome", r.outcome == gbce::Outcome::ok ? "ok" : "no_parse"},
                        {"clean_text", r.clean_text},
                        {"conditions", r.set.conditions},
                        {"rule_trace", r.set.rule_trace},
                        {"warnings", r.warnings}};
    out += j.dump() + "\n";
    clean_lines += key.first + "\t" + std::to_string(key.second) + "\t" + r.clean_text + "\n";
  }
  ensure_parent(c.out);
  write_file(c.out, out);
  std::map<std::string, fs::path> inputs{{"records", c.records}};
  if (c.conllu) inputs["conllu"] = *c.conllu;
  if (c.grammar) inputs["grammar"] = *c.grammar;
  write_provenance(c.out, "conditions", 0, inputs,
                   {{"sentences", res.sentences}, {"parsed", res.parsed}, {"with_conditions", res.with_conditions}});
  if (c.emit_clean) {
    ensure_parent(*c.emit_clean);
    write_file(*c.emit_clean, clean_lines);
  }
  return res;
}

EmbedResult run_embed(const EmbedConfig& c) {
  require_file(c.sentences, "sentences file");
  embed::validate(c.skipgram);
  if (c.min_count < 1) throw ConfigError("min-count must be >= 1");
  auto corpus = tokenized(ingest::read_sentences(c.sentences));
  auto vocab = embed::build_vocab(corpus, c.min_count);
  auto cfg = c.skipgram;
  cfg.threads = thread_budget(cfg.threads);
  auto trained = embed::train_skipgram(embed::encode(corpus, vocab), vocab, cfg);
  ensure_parent(c.out);
  embed::save_embedding(c.out, trained.embedding);
  write_provenance(c.out, "embed", cfg.seed, {{"sentences", c.sentences}},
                   {{"dim", cfg.dim},
                    {"window", cfg.window},
                    {"negatives", cfg.negatives},
                    {"epochs", cfg.epochs},
                    {"lr", cfg.lr},
                    {"threads", cfg.threads},
                    {"min_count", c.min_count},
                    {"vocabulary", vocab.size()},
                    {"coverage", vocab.coverage},
                    {"epoch_loss", trained.epoch_loss}});
  return {vocab.size(), vocab.coverage, trained.epoch_loss};
}

abae::TrainResult run_abae_train(const AbaeTrainConfig& c) {
  require_file(c.sentences, "sentences file");
  require_file(c.embedding, "embedding file");
  abae::validate(c.abae);
  auto embedding = embed::load_embedding(c.embedding);
  auto corpus = abae::encode_sentences(tokenized(ingest::read_sentences(c.sentences)), embedding.words, c.abae.max_len);
  auto result = abae::train(c.abae, corpus, embedding);
  abae::save_model(c.out, result.params, c.abae, c.embedding);
  nlohmann::json curve = {{"epoch_loss", result.epoch_loss},
                          {"epoch_orthogonality", result.epoch_orthogonality},
                          {"initial_orthogonality", result.initial_orthogonality},
                          {"best_epoch", result.best_epoch},
                          {"skipped_sentences", result.skipped_sentences}};
  write_file(c.out / "training.json", curve.dump(2) + "\n");
  if (!fs::exists(c.out / "labels.json")) abae::save_labels(c.out, {});
  write_provenance(c.out / "model.json", "abae-train", c.abae.seed,
                   {{"sentences", c.sentences}, {"embedding", c.embedding}}, abae::to_json(c.abae));
  return result;
}

std::size_t run_abae_infer(const AbaeInferConfig& c) {
  require_file(c.model / "model.json", "model");
  require_file(c.sentences, "sentences file");
  auto model = abae::load_model(c.model);
  auto labels = abae::load_labels(c.model);
  auto sentences = ingest::read_sentences(c.sentences);
  auto corpus = abae::encode_sentences(tokenized(sentences), model.params.words, model.config.max_len);
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto a = abae::infer(model.params, corpus[i]);
    nlohmann::json j = {{"doc_id", sentences[i].doc_id}, {"sentence_index", sentences[i].index}};
    if (a.no_signal) {
      j["outcome"] = "no_signal";
    } else {
      j["outcome"] = "ok";
      j["aspect"] = a.aspect;
      auto it = labels.find(a.aspect);
      j["label"] = it == labels.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second);
      j["p"] = std::vector<double>(a.p.data(), a.p.data() + a.p.size());
    }
    out += j.dump() + "\n";
  }
  ensure_parent(c.out);
  write_file(c.out, out);
  write_provenance(c.out, "abae-infer", model.config.seed, {{"model", c.model / "model.json"}, {"sentences", c.sentences}},
                   {{"sentences", sentences.size()}});
  return sentences.size();
}

void run_abae_words(const fs::path& model_dir, std::size_t top, std::ostream& out) {
  require_file(model_dir / "model.json", "model");
  auto model = abae::load_model(model_dir);
  auto labels = abae::load_labels(model_dir);
  auto words = abae::representative_words(model.params, top);
  for (std::size_t k = 0; k < words.size(); ++k) {
    out << "aspect " << k;
    if (auto it = labels.find(static_cast<int>(k)); it != labels.end()) out << " [" << it->second << "]";
    out << ':';
    for (const auto& w : words[k]) out << ' ' << w.word;
    out << '\n';
  }
}

analytics::Summary run_analyze(const AnalyzeConfig& c) {
  require_file(c.records, "records file");
  auto rows = analytics::read_records(c.records);
  std::vector<rules::StatisticRecord> records;
  records.reserve(rows.size());
  for (const auto& r : rows) records.push_back(r.record);
  fs::create_directories(c.out);

  auto summary = analytics::summarize(records);
  write_file(c.out / "summary.json", analytics::to_json(summary).dump(2) + "\n");
  write_file(c.out / "summary.txt", analytics::render(summary));
  for (auto t : rules::kAllStatTypes) {
    if (rules::required_params(t).empty()) continue;
    auto m = analytics::missing_matrix(records, t);
    auto name = "missing_" + std::string(rules::to_string(t));
    write_file(c.out / (name + ".json"), analytics::to_json(m).dump(2) + "\n");
    write_file(c.out / (name + ".txt"), analytics::render(m));
  }
  auto sample = analytics::sample_for_review(rows, c.sample_per_stratum, c.seed);
  write_file(c.out / "review_sample.tsv", analytics::review_sheet(sample));

  std::map<std::string, fs::path> inputs{{"records", c.records}};
  nlohmann::json params = {{"sample_per_stratum", c.sample_per_stratum}, {"records", rows.size()}};
  if (c.sentences) {
    require_file(*c.sentences, "sentences file");
    auto sentences = ingest::read_sentences(*c.sentences);
    rules::CompiledRules compiled(load_rules_or_starter(c.rules));
    auto cov = analytics::coverage(sentences, compiled, thread_budget(std::thread::hardware_concurrency()));
    write_file(c.out / "coverage.json",
               nlohmann::json{{"sentences", cov.sentences}, {"covered", cov.covered}, {"coverage", cov.fraction()}}
                       .dump(2) +
                   "\n");
    inputs["sentences"] = *c.sentences;
    if (c.rules) inputs["rules"] = *c.rules;
  }
  write_provenance(c.out / "summary.json", "analyze", c.seed, inputs, params);
  return summary;
}

namespace {

// Caret line marking uncovered digit spans under the sentence.
std::string marker_line(const std::string& text, const std::vector<Span>& spans) {
  std::string line(text.size(), ' ');
  for (const auto& s : spans) {
    for (std::size_t i = s.start; i < s.end && i < line.size(); ++i) line[i] = '^';
  }
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace

void run_learn_prompt(session::Session& s, std::istream& in, std::ostream& out) {
  std::optional<session::UnclassifiedItem> current;
  auto show = [&] {
    current = s.next_unclassified();
    if (!current) {
      out << "all candidate sentences are classified\n" << session::to_json(s.metrics()).dump(2) << '\n';
      return;
    }
    out << current->sentence.doc_id << " #" << current->sentence.index << '\n'
        << current->sentence.text << '\n'
        << marker_line(current->sentence.text, current->uncovered) << '\n';
  };
  show();
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    auto cmd_end = line.find(' ');
    std::string cmd = line.substr(0, cmd_end);
    std::string arg = cmd_end == std::string::npos ? "" : std::string(trim(line.substr(cmd_end + 1)));
    try {
      if (cmd == "quit" || cmd == "exit") {
        break;
      } else if (cmd == "next") {
        show();
      } else if (cmd == "test" || cmd == "accept") {
        auto proposal = session::proposal_from_json(nlohmann::json::parse(arg));
        if (cmd == "test") {
          out << session::to_json(s.test_proposal(proposal)).dump(2) << '\n';
        } else {
          out << "accepted, rule sets now at version " << s.accept_proposal(proposal) << '\n';
          show();
        }
      } else if (cmd == "skip") {
        if (current) s.skip(current->sentence.doc_id, current->sentence.index);
        show();
      } else if (cmd == "metrics") {
        out << session::to_json(s.metrics()).dump(2) << '\n';
      } else if (cmd == "export") {
        if (arg.empty()) throw ConfigError("export needs a file name");
        rules::save_rulesets(arg, s.rulesets());
        out << "wrote " << arg << '\n';
      } else if (!cmd.empty()) {
        out << "commands: next | test <json> | accept <json> | skip | metrics | export <file> | quit\n";
      }
    } catch (const session::Rejected& e) {
      out << "rejected (" << e.reason() << "): " << e.what() << '\n';
    } catch (const session::InvalidProposal& e) {
      out << "invalid rule at offset " << e.diagnostic().position << ": " << e.diagnostic().message << '\n';
    } catch (const std::exception& e) {
      out << "error: " << e.what() << '\n';
    }
  }
}

void run_pipeline(const PipelineConfig& c, std::ostream& log) {
  require_dir(c.corpus, "corpus");
  if (c.rules) require_file(*c.rules, "rules file");
  if (c.grammar) require_file(*c.grammar, "grammar rules file");
  embed::validate(c.skipgram);
  abae::validate(c.abae);
  fs::create_directories(c.out);

  const fs::path sentences = c.out / "sentences.jsonl";
  const fs::path records = c.out / "records.jsonl";
  const fs::path statistic = c.out / "statistic_sentences.jsonl";
  const fs::path conditions = c.out / "conditions.jsonl";
  const fs::path embedding = c.out / "embedding.txt";
  const fs::path model = c.out / "abae";
  const fs::path aspects = c.out / "aspects.jsonl";
  const fs::path analysis = c.out / "analysis";

  auto seeded = c.abae;
  seeded.seed = c.seed;
  auto skipgram = c.skipgram;
  skipgram.seed = c.seed;
  skipgram.threads = 1;  // keeps reruns byte-identical

  std::vector<std::pair<std::string, std::function<void()>>> stages{
      {"ingest", [&] { run_ingest({c.corpus, sentences, false, c.threads}); }},
      {"extract",
       [&] {
         auto r = run_extract({std::nullopt, sentences, c.rules, records, statistic, c.threads});
         log << analytics::render(r.summary);
       }},
      {"conditions", [&] { run_conditions({records, c.conllu, c.grammar, conditions, std::nullopt}); }},
      {"embed", [&] { run_embed({statistic, embedding, skipgram, c.min_count}); }},
      {"abae-train", [&] { run_abae_train({statistic, embedding, model, seeded}); }},
      {"abae-infer", [&] { run_abae_infer({model, statistic, aspects}); }},
      {"analyze",
       [&] {
         run_analyze({records, analysis, c.sample_per_stratum, c.seed, sentences, c.rules});
       }},
  };

  nlohmann::json status = {{"seed", c.seed}, {"stages", nlohmann::json::array()}};
  std::optional<std::string> failure;
  for (const auto& [name, run] : stages) {
    if (failure) {
      status["stages"].push_back({{"stage", name}, {"status", "not_run"}});
      continue;
    }
    log << "[" << name << "]\n";
    try {
      run();
      status["stages"].push_back({{"stage", name}, {"status", "ok"}});
    } catch (const std::exception& e) {
      failure = name + ": " + e.what();
      status["stages"].push_back({{"stage", name}, {"status", "failed"}, {"error", e.what()}});
    }
  }
  write_file(c.out / "pipeline.json", status.dump(2) + "\n");
  if (failure) throw Error("pipeline stopped at " + *failure + " (outputs of earlier stages are kept)");
}

}  // namespace stereo::cli
