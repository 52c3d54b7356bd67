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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereo/ingest.hpp"
#include "stereo/rules.hpp"

namespace stereo::analytics {

// A statistic record together with the sentence it came from.
struct RecordRow {
  rules::StatisticRecord record;
  std::string sentence;
};

// JSON lines, one record per line (see rules::to_json).
void write_records(const std::filesystem::path& path, const std::vector<RecordRow>& rows);
std::vector<RecordRow> read_records(const std::filesystem::path& path);

struct TypeCounts {
  std::size_t apa = 0;
  std::size_t non_apa = 0;
  std::size_t total() const { return apa + non_apa; }
  friend bool operator==(const TypeCounts&, const TypeCounts&) = default;
};

struct Summary {
  std::map<rules::StatType, TypeCounts> by_type;  // every type present

  Summary();
  void add(const rules::StatisticRecord& r);
  Summary& merge(const Summary& other);
  TypeCounts totals() const;
  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(const std::vector<rules::StatisticRecord>& records);
nlohmann::json to_json(const Summary& s);
std::string render(const Summary& s);

// Co-occurrence of missing parameters among non-APA records of one type.
struct MissingMatrix {
  rules::StatType type = rules::StatType::other;
  std::vector<rules::Param> params;  // the type's required parameters
  // Key (a, b) with a <= b in `params` order; (a, a) counts "missing alone".
  std::map<std::pair<rules::Param, rules::Param>, std::size_t> cells;
  // Three or more missing parameters, keyed by the exact set.
  std::map<std::set<rules::Param>, std::size_t> other;
  std::size_t records = 0;   // non-APA records of the type
  std::size_t complete = 0;  // of which nothing is missing

  std::size_t cell(rules::Param a, rules::Param b) const;
  // Records missing `p`, alone or in combination.
  std::size_t row_sum(rules::Param p) const;
  std::size_t other_total() const;
};

// Throws ParseError when a record lists a parameter outside the type's
// required list.
MissingMatrix missing_matrix(const std::vector<rules::StatisticRecord>& records, rules::StatType type);
nlohmann::json to_json(const MissingMatrix& m);
std::string render(const MissingMatrix& m);

struct Coverage {
  std::size_t sentences = 0;
  std::size_t covered = 0;
  double fraction() const { return sentences == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(sentences); }
};

// Throws Error on an empty sample.
Coverage coverage(const std::vector<ingest::Sentence>& sample, const rules::CompiledRules& rules, unsigned threads = 1);

// Up to per_stratum records from each (stat_type, apa_conform) stratum,
// uniformly without replacement. Output keeps input order.
std::vector<RecordRow> sample_for_review(const std::vector<RecordRow>& rows, std::size_t per_stratum,
                                         std::uint64_t seed);

// Tab-separated review sheet with empty verdict columns for two reviewers.
std::string review_sheet(const std::vector<RecordRow>& rows);

}  // namespace stereo::analytics
