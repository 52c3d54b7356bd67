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

#include "stereo/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include "stereo/error.hpp"
#include "stereo/sampling.hpp"
#include "stereo/text.hpp"

namespace stereo::analytics {

using rules::Param;
using rules::StatType;

void write_records(const std::filesystem::path& path, const std::vector<RecordRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += rules::to_json(r.record, r.sentence).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<RecordRow> read_records(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<RecordRow> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      RecordRow row;
      row.record = rules::record_from_json(nlohmann::json::parse(line), &row.sentence);
      out.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Summary::Summary() {
  for (StatType t : rules::kAllStatTypes) by_type[t] = {};
}

void Summary::add(const rules::StatisticRecord& r) {
  auto& c = by_type[r.stat_type];
  (r.apa_conform ? c.apa : c.non_apa) += 1;
}

Summary& Summary::merge(const Summary& other) {
  for (const auto& [t, c] : other.by_type) {
    by_type[t].apa += c.apa;
    by_type[t].non_apa += c.non_apa;
  }
  return *this;
}

TypeCounts Summary::totals() const {
  TypeCounts t;
  for (const auto& [_, c] : by_type) {
    t.apa += c.apa;
    t.non_apa += c.non_apa;
  }
  return t;
}

Summary summarize(const std::vector<rules::StatisticRecord>& records) {
  Summary s;
  for (const auto& r : records) s.add(r);
  return s;
}

nlohmann::json to_json(const Summary& s) {
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [t, c] : s.by_type) types[std::string(to_string(t))] = {{"apa", c.apa}, {"non_apa", c.non_apa}};
  auto tot = s.totals();
  return {{"types", types}, {"total", {{"apa", tot.apa}, {"non_apa", tot.non_apa}}}};
}

std::string render(const Summary& s) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "type" << std::right << std::setw(10) << "APA" << std::setw(10) << "non-APA"
      << '\n';
  for (const auto& [t, c] : s.by_type) {
    out << std::left << std::setw(16) << to_string(t) << std::right << std::setw(10) << c.apa << std::setw(10)
        << c.non_apa << '\n';
  }
  auto tot = s.totals();
  out << std::left << std::setw(16) << "total" << std::right << std::setw(10) << tot.apa << std::setw(10)
      << tot.non_apa << '\n';
  return out.str();
}

std::size_t MissingMatrix::cell(Param a, Param b) const {
  auto pos = [&](Param p) { return std::find(params.begin(), params.end(), p) - params.begin(); };
  if (pos(b) < pos(a)) std::swap(a, b);
  auto it = cells.find({a, b});
  return it == cells.end() ? 0 : it->second;
}

std::size_t MissingMatrix::row_sum(Param p) const {
  std::size_t n = 0;
  for (const auto& [key, count] : cells) {
    if (key.first == p || key.second == p) n += count;
  }
  for (const auto& [set, count] : other) {
    if (set.count(p)) n += count;
  }
  return n;
}

std::size_t MissingMatrix::other_total() const {
  std::size_t n = 0;
  for (const auto& [_, count] : other) n += count;
  return n;
}

MissingMatrix missing_matrix(const std::vector<rules::StatisticRecord>& records, StatType type) {
  MissingMatrix m;
  m.type = type;
  m.params = rules::required_params(type);
  auto pos = [&](Param p) { return std::find(m.params.begin(), m.params.end(), p) - m.params.begin(); };
  for (const auto& r : records) {
    if (r.stat_type != type || r.apa_conform) continue;
    for (Param p : r.missing_params) {
      if (pos(p) == static_cast<std::ptrdiff_t>(m.params.size())) {
        throw ParseError("record " + r.doc_id + "#" + std::to_string(r.sentence_index) + " lists '" +
                         std::string(to_string(p)) + "' as missing, which " + std::string(to_string(type)) +
                         " does not require");
      }
    }
    ++m.records;
    std::vector<Param> miss(r.missing_params.begin(), r.missing_params.end());
    std::sort(miss.begin(), miss.end(), [&](Param a, Param b) { return pos(a) < pos(b); });
    if (miss.empty()) {
      ++m.complete;
    } else if (miss.size() == 1) {
      ++m.cells[{miss[0], miss[0]}];
    } else if (miss.size() == 2) {
      ++m.cells[{miss[0], miss[1]}];
    } else {
      ++m.other[std::set<Param>(miss.begin(), miss.end())];
    }
  }
  return m;
}

nlohmann::json to_json(const MissingMatrix& m) {
  nlohmann::json params = nlohmann::json::array();
  for (Param p : m.params) params.push_back(std::string(to_string(p)));
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t j = i; j < m.params.size(); ++j) row[std::string(to_string(m.params[j]))] = m.cell(m.params[i], m.params[j]);
    std::size_t other = 0;
    for (const auto& [set, count] : m.other) {
      if (set.count(m.params[i])) other += count;
    }
    row["other"] = other;
    row["sum"] = m.row_sum(m.params[i]);
    rows[std::string(to_string(m.params[i]))] = row;
  }
  nlohmann::json other = nlohmann::json::array();
  for (const auto& [set, count] : m.other) {
    nlohmann::json names = nlohmann::json::array();
    for (Param p : m.params) {
      if (set.count(p)) names.push_back(std::string(to_string(p)));
    }
    other.push_back({{"missing", names}, {"count", count}});
  }
  return {{"stat_type", std::string(to_string(m.type))},
          {"params", params},
          {"rows", rows},
          {"other", other},
          {"records", m.records},
          {"complete", m.complete}};
}

std::string render(const MissingMatrix& m) {
  std::ostringstream out;
  out << "missing parameters, non-APA " << to_string(m.type) << " (" << m.records << " records)\n";
  out << std::left << std::setw(14) << "";
  for (Param p : m.params) out << std::right << std::setw(14) << to_string(p);
  out << std::setw(8) << "other" << std::setw(8) << "sum" << '\n';
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    out << std::left << std::setw(14) << to_string(m.params[i]);
    for (std::size_t j = 0; j < m.params.size(); ++j) {
      out << std::right << std::setw(14);
      if (j < i) {
        out << "-";
      } else {
        out << m.cell(m.params[i], m.params[j]);
      }
    }
    std::size_t other = 0;
    for (const auto& [set, count] : m.other) {
      if (set.count(m.params[i])) other += count;
    }
    out << std::setw(8) << other << std::setw(8) << m.row_sum(m.params[i]) << '\n';
  }
  for (const auto& [set, count] : m.other) {
    out << "  other:";
    for (Param p : m.params) {
      if (set.count(p)) out << ' ' << to_string(p);
    }
    out << " = " << count << '\n';
  }
  return out.str();
}

Coverage coverage(const std::vector<ingest::Sentence>& sample, const rules::CompiledRules& rules, unsigned threads) {
  if (sample.empty()) throw Error("coverage of an empty sample is undefined");
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sample.size())));
  std::atomic<std::size_t> covered{0};
  auto work = [&](unsigned t) {
    std::size_t local = 0;
    for (std::size_t i = t; i < sample.size(); i += threads) {
      if (rules::classify_sentence(sample[i].text, rules).status == rules::Status::all_covered) ++local;
    }
    covered += local;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return {sample.size(), covered.load()};
}

std::vector<RecordRow> sample_for_review(const std::vector<RecordRow>& rows, std::size_t per_stratum,
                                         std::uint64_t seed) {
  std::map<std::pair<StatType, bool>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    strata[{rows[i].record.stat_type, rows[i].record.apa_conform}].push_back(i);
  }
  std::vector<std::size_t> picked;
  for (const auto& [key, members] : strata) {
    std::uint64_t s = seed ^ (static_cast<std::uint64_t>(key.first) * 0x9E3779B97F4A7C15ULL + (key.second ? 1 : 0));
    for (std::size_t k : sample_indices(members.size(), per_stratum, s)) picked.push_back(members[k]);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<RecordRow> out;
  for (std::size_t i : picked) out.push_back(rows[i]);
  return out;
}

namespace {

std::string cell_text(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

}  // namespace

std::string review_sheet(const std::vector<RecordRow>& rows) {
  std::ostringstream out;
  out << "doc_id\tsentence_index\tstat_type\tapa_conform\trule_id\tfragment\tparams\tsentence\treviewer_1\treviewer_2\n";
  for (const auto& r : rows) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [p, v] : r.record.params) params[std::string(to_string(p))] = v;
    out << cell_text(r.record.doc_id) << '\t' << r.record.sentence_index << '\t' << to_string(r.record.stat_type)
        << '\t' << (r.record.apa_conform ? "yes" : "no") << '\t' << cell_text(r.record.rule_id) << '\t'
        << cell_text(r.record.fragment) << '\t' << params.dump() << '\t' << cell_text(r.sentence) << "\t\t\n";
  }
  return out.str();
}

}  // namespace stereo::analytics
