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

#include "stereo/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "stereo/error.hpp"

namespace stereo::ingest {

std::vector<Span> sentence_spans(std::string_view block) {
  std::vector<Span> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < block.size()) {
    if (block[i] != '.') {
      ++i;
      continue;
    }
    std::size_t next = i + 1;
    if (next < block.size() && is_space(block[next]) && next + 1 < block.size() &&
        is_upper(block[next + 1])) {
      spans.push_back({start, i + 1});
      start = next + 1;
      i = start;
    } else if (next < block.size() && is_upper(block[next])) {
      spans.push_back({start, i + 1});
      start = next;
      i = start;
    } else {
      ++i;
    }
  }
  if (start < block.size()) spans.push_back({start, block.size()});
  return spans;
}

std::vector<std::string> split_sentences(std::string_view block) {
  std::vector<std::string> out;
  for (const Span& s : sentence_spans(block)) out.emplace_back(block.substr(s.start, s.size()));
  return out;
}

Document parse_document(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("document is not a JSON object");
  if (!j.contains("doc_id") || !j["doc_id"].is_string())
    throw ParseError("missing string field 'doc_id'");
  if (!j.contains("body") || !j["body"].is_array())
    throw ParseError("missing array field 'body'");
  Document doc;
  doc.doc_id = j["doc_id"].get<std::string>();
  if (doc.doc_id.empty()) throw ParseError("empty doc_id");
  if (j.contains("title") && j["title"].is_string()) doc.title = j["title"].get<std::string>();
  for (const auto& p : j["body"]) {
    if (!p.is_string()) throw ParseError("body entries must be strings");
    auto text = p.get<std::string>();
    if (!trim(text).empty()) doc.paragraphs.push_back(std::move(text));
  }
  return doc;
}

Document load_document(const std::filesystem::path& path) {
  return parse_document(read_file(path));
}

std::vector<Sentence> document_sentences(const Document& doc, const LanguageDetector& lang) {
  std::vector<Sentence> out;
  std::size_t index = 0;
  for (const auto& para : doc.paragraphs) {
    for (const Span& span : sentence_spans(para)) {
      auto text = trim(std::string_view(para).substr(span.start, span.size()));
      if (text.empty()) continue;
      Sentence s;
      s.doc_id = doc.doc_id;
      s.index = index++;
      s.text = std::string(text);
      s.has_digit = contains_digit(s.text);
      auto guess = lang.detect(s.text);
      s.language = guess.code;
      s.language_ok = guess.code == "en";
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("corpus is not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

void tally(IngestReport& report, const std::vector<Sentence>& sentences) {
  report.documents += 1;
  for (const auto& s : sentences) {
    report.sentences += 1;
    if (s.has_digit) report.with_digit += 1;
    if (!s.language_ok) report.language_rejected += 1;
    if (s.has_digit && s.language_ok) report.candidates += 1;
  }
}

}  // namespace

CandidateStream::CandidateStream(const std::filesystem::path& dir, const LanguageDetector& lang)
    : lang_(lang), files_(corpus_files(dir)) {
  report_.files = files_.size();
}

bool CandidateStream::load_next_document() {
  while (file_pos_ < files_.size()) {
    const auto& path = files_[file_pos_++];
    Document doc;
    try {
      doc = load_document(path);
    } catch (const Error& e) {
      report_.skipped.push_back({path.filename().string(), e.what()});
      continue;
    }
    auto [it, inserted] = seen_ids_.emplace(doc.doc_id, path.filename().string());
    if (!inserted) {
      report_.skipped.push_back(
          {path.filename().string(), "duplicate doc_id '" + doc.doc_id + "' (first in " + it->second + ")"});
      continue;
    }
    auto sentences = document_sentences(doc, lang_);
    tally(report_, sentences);
    buffer_.clear();
    for (auto& s : sentences) {
      if (s.has_digit && s.language_ok) buffer_.push_back(std::move(s));
    }
    buffer_pos_ = 0;
    return true;
  }
  return false;
}

std::optional<Sentence> CandidateStream::next() {
  while (buffer_pos_ >= buffer_.size()) {
    if (!load_next_document()) return std::nullopt;
  }
  return std::move(buffer_[buffer_pos_++]);
}

std::vector<Sentence> ingest_corpus(const std::filesystem::path& dir, const IngestOptions& options,
                                    IngestReport& report, const LanguageDetector& lang) {
  auto files = corpus_files(dir);
  report = IngestReport{};
  report.files = files.size();

  struct Slot {
    std::optional<Document> doc;
    std::string error;
    std::vector<Sentence> sentences;
  };
  std::vector<Slot> slots(files.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i = cursor++; i < files.size(); i = cursor++) {
      try {
        slots[i].doc = load_document(files[i]);
        slots[i].sentences = document_sentences(*slots[i].doc, lang);
      } catch (const Error& e) {
        slots[i].doc.reset();
        slots[i].error = e.what();
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(files.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::map<std::string, std::string> seen;
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto name = files[i].filename().string();
    if (!slots[i].doc) {
      report.skipped.push_back({name, slots[i].error});
      continue;
    }
    auto [it, inserted] = seen.emplace(slots[i].doc->doc_id, name);
    if (!inserted) {
      report.skipped.push_back({name, "duplicate doc_id '" + slots[i].doc->doc_id + "' (first in " + it->second + ")"});
      continue;
    }
    tally(report, slots[i].sentences);
    for (auto& s : slots[i].sentences) {
      if (options.keep_all || (s.has_digit && s.language_ok)) out.push_back(std::move(s));
    }
  }
  return out;
}

nlohmann::json to_json(const Sentence& s) {
  return nlohmann::json{{"doc_id", s.doc_id},
                        {"index", s.index},
                        {"text", s.text},
                        {"has_digit", s.has_digit},
                        {"language", s.language}};
}

Sentence sentence_from_json(const nlohmann::json& j) {
  try {
    Sentence s;
    s.doc_id = j.at("doc_id").get<std::string>();
    s.index = j.at("index").get<std::size_t>();
    s.text = j.at("text").get<std::string>();
    s.has_digit = j.contains("has_digit") ? j["has_digit"].get<bool>() : contains_digit(s.text);
    s.language = j.contains("language") ? j["language"].get<std::string>() : "en";
    s.language_ok = s.language == "en";
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad sentence record: ") + e.what());
  }
}

void write_sentences(const std::filesystem::path& path, const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += to_json(s).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Sentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(sentence_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace stereo::ingest
