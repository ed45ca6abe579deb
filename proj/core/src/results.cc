//
// Copyright 2026 The Memlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "memlab/results.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "memlab/embedded_data.h"
#include "memlab/error.h"

namespace memlab {
namespace {

constexpr std::string_view kColumns[] = {
    "id",         "hidden_size",  "insertions",      "vocab_size",
    "l2_lambda",  "dropout",      "scrub",           "dp_epsilon",
    "canaries_greedy", "canaries_beam", "completion_nll", "test_nll",
    "test_accuracy"};
constexpr int kNumColumns = 13;

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos
                                         ? std::string_view::npos
                                         : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view s, std::string_view column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("results column '" + std::string(column) + "': bad value '" +
                     std::string(s) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v))
      throw ParseError("results column '" + std::string(column) + "': non-finite");
  }
  return v;
}

template <typename T>
std::optional<T> ParseOptional(std::string_view s, std::string_view column) {
  if (s == kMissing) return std::nullopt;
  return ParseNumber<T>(s, column);
}

template <typename T>
std::string FormatOptional(const std::optional<T>& v) {
  if (!v) return std::string(kMissing);
  if constexpr (std::is_floating_point_v<T>) {
    return FormatDouble(*v);
  } else {
    return std::to_string(*v);
  }
}

void CheckRow(const ResultRow& r) {
  if (r.id.empty() || r.id.find_first_of(",\n\r") != std::string::npos)
    throw DataError("result id must be nonempty and free of commas/newlines");
}

}  // namespace

std::string FormatDouble(double v) {
  if (!std::isfinite(v)) throw DataError("cannot format non-finite value");
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DataError("number formatting failed");
  return std::string(buf, ptr);
}

std::string FormatRow(const ResultRow& r) {
  CheckRow(r);
  std::string s = r.id;
  auto add = [&s](const std::string& v) {
    s += ',';
    s += v;
  };
  add(FormatOptional(r.hidden_size));
  add(std::to_string(r.insertions));
  add(FormatOptional(r.vocab_size));
  add(FormatDouble(r.l2_lambda));
  add(FormatDouble(r.dropout));
  add(r.scrub ? "1" : "0");
  add(FormatOptional(r.dp_epsilon));
  add(std::to_string(r.canaries_greedy));
  add(std::to_string(r.canaries_beam));
  add(FormatDouble(r.completion_nll));
  add(FormatDouble(r.test_nll));
  add(FormatOptional(r.test_accuracy));
  return s;
}

ResultRow ParseRow(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = SplitCommas(line);
  if (static_cast<int>(f.size()) != kNumColumns)
    throw ParseError("results row has " + std::to_string(f.size()) + " columns, expected " +
                     std::to_string(kNumColumns) + ": " + std::string(line));
  ResultRow r;
  r.id = std::string(f[0]);
  if (r.id.empty()) throw ParseError("results row with empty id");
  r.hidden_size = ParseOptional<int>(f[1], kColumns[1]);
  r.insertions = ParseNumber<int>(f[2], kColumns[2]);
  r.vocab_size = ParseOptional<int>(f[3], kColumns[3]);
  r.l2_lambda = ParseNumber<double>(f[4], kColumns[4]);
  r.dropout = ParseNumber<double>(f[5], kColumns[5]);
  if (f[6] != "0" && f[6] != "1")
    throw ParseError("results column 'scrub': expected 0 or 1, got '" + std::string(f[6]) + "'");
  r.scrub = f[6] == "1";
  r.dp_epsilon = ParseOptional<double>(f[7], kColumns[7]);
  r.canaries_greedy = ParseNumber<int>(f[8], kColumns[8]);
  r.canaries_beam = ParseNumber<int>(f[9], kColumns[9]);
  r.completion_nll = ParseNumber<double>(f[10], kColumns[10]);
  r.test_nll = ParseNumber<double>(f[11], kColumns[11]);
  r.test_accuracy = ParseOptional<double>(f[12], kColumns[12]);
  return r;
}

void EmitCsv(std::vector<ResultRow> rows, std::ostream& out) {
  if (rows.empty()) throw DataError("no result rows to emit");
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.id < b.id; });
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << FormatRow(r) << '\n';
}

void EmitCsvFile(const std::vector<ResultRow>& rows, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    EmitCsv(rows, out);
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::vector<ResultRow> ParseCsv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kResultsHeader) throw ParseError("results header mismatch: " + line);
      header = true;
      continue;
    }
    rows.push_back(ParseRow(line));
  }
  if (!header) throw ParseError("results file has no header");
  return rows;
}

std::vector<ResultRow> ParseCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results " + path);
  return ParseCsv(in);
}

const std::vector<ResultRow>& ReferenceResults() {
  static const std::vector<ResultRow> rows = [] {
    std::istringstream in{std::string(embedded::ReferenceResultsCsv())};
    return ParseCsv(in);
  }();
  return rows;
}

std::vector<ResultRow> ReferenceLstmRows() {
  std::vector<ResultRow> out;
  for (const auto& r : ReferenceResults())
    if (r.hidden_size) out.push_back(r);
  return out;
}

bool IsGroupingColumn(std::string_view column) {
  return column == "hidden_size" || column == "vocab_size" || column == "l2_lambda" ||
         column == "dropout" || column == "scrub" || column == "dp_epsilon";
}

std::string ColumnValue(const ResultRow& r, std::string_view column) {
  if (column == "id") return r.id;
  if (column == "hidden_size") return FormatOptional(r.hidden_size);
  if (column == "insertions") return std::to_string(r.insertions);
  if (column == "vocab_size") return FormatOptional(r.vocab_size);
  if (column == "l2_lambda") return FormatDouble(r.l2_lambda);
  if (column == "dropout") return FormatDouble(r.dropout);
  if (column == "scrub") return r.scrub ? "1" : "0";
  if (column == "dp_epsilon") return FormatOptional(r.dp_epsilon);
  if (column == "canaries_greedy") return std::to_string(r.canaries_greedy);
  if (column == "canaries_beam") return std::to_string(r.canaries_beam);
  if (column == "completion_nll") return FormatDouble(r.completion_nll);
  if (column == "test_nll") return FormatDouble(r.test_nll);
  if (column == "test_accuracy") return FormatOptional(r.test_accuracy);
  throw ConfigError("unknown results column '" + std::string(column) + "'");
}

CurveSet EmitCurves(const std::vector<ResultRow>& rows, std::string_view group_by,
                    CurveMetric metric) {
  if (!IsGroupingColumn(group_by))
    throw ConfigError("cannot group curves by '" + std::string(group_by) + "'");
  // Key order: numeric ascending, "n/a" last.
  auto key_less = [](const std::string& a, const std::string& b) {
    if (a == kMissing || b == kMissing) return a != kMissing && b == kMissing;
    return std::stod(a) < std::stod(b);
  };
  std::map<std::string, std::map<int, int>, decltype(key_less)> groups(key_less);
  for (const auto& r : rows) {
    const std::string key = ColumnValue(r, group_by);
    auto& points = groups[key];
    const int y = metric == CurveMetric::kGreedy ? r.canaries_greedy : r.canaries_beam;
    if (!points.emplace(r.insertions, y).second)
      throw DataError("curve group " + std::string(group_by) + "=" + key +
                      " has two rows at insertions " + std::to_string(r.insertions) +
                      "; filter the rows first");
  }
  CurveSet out;
  for (const auto& [key, points] : groups) {
    CurveSeries s{std::string(group_by) + "=" + key, {}};
    for (const auto& [x, y] : points) s.points.push_back({x, y});
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      if (s.points[i].canaries < s.points[i - 1].canaries) {
        out.warnings.push_back(s.label + ": extraction decreases from insertions " +
                               std::to_string(s.points[i - 1].insertions) + " to " +
                               std::to_string(s.points[i].insertions));
        break;
      }
    }
    out.series.push_back(std::move(s));
  }
  return out;
}

void WriteCurvesCsv(const CurveSet& curves, std::ostream& out) {
  out << "label,insertions,canaries\n";
  for (const auto& s : curves.series)
    for (const auto& p : s.points) out << s.label << ',' << p.insertions << ',' << p.canaries << '\n';
}

}  // namespace memlab
