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

#ifndef MEMLAB_RESULTS_H_
#define MEMLAB_RESULTS_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace memlab {

// One experiment's outcome in the results table schema. Columns the
// experiment has no value for are empty optionals and print as "n/a".
struct ResultRow {
  std::string id;
  std::optional<int> hidden_size;
  int insertions = 0;
  std::optional<int> vocab_size;
  double l2_lambda = 0.0;
  double dropout = 0.0;
  bool scrub = false;
  std::optional<double> dp_epsilon;
  int canaries_greedy = 0;
  int canaries_beam = 0;
  double completion_nll = 0.0;
  double test_nll = 0.0;
  std::optional<double> test_accuracy;

  bool operator==(const ResultRow&) const = default;
};

inline constexpr std::string_view kResultsHeader =
    "id,hidden_size,insertions,vocab_size,l2_lambda,dropout,scrub,dp_epsilon,"
    "canaries_greedy,canaries_beam,completion_nll,test_nll,test_accuracy";

inline constexpr std::string_view kMissing = "n/a";

// Shortest decimal that parses back to the same double.
std::string FormatDouble(double v);

std::string FormatRow(const ResultRow& row);
// Throws ParseError naming the offending column.
ResultRow ParseRow(std::string_view line);

// Header plus rows sorted by id. Throws DataError on an empty row set.
void EmitCsv(std::vector<ResultRow> rows, std::ostream& out);
// Writes through a temporary file and renames it into place.
void EmitCsvFile(const std::vector<ResultRow>& rows, const std::string& path);

// Skips '#' comment lines and blank lines; requires the exact header.
std::vector<ResultRow> ParseCsv(std::istream& in);
std::vector<ResultRow> ParseCsvFile(const std::string& path);

// The full-scale reference results shipped with the library.
const std::vector<ResultRow>& ReferenceResults();

// Transcribed LSTM rows (those with a hidden size).
std::vector<ResultRow> ReferenceLstmRows();

enum class CurveMetric { kGreedy, kBeam };

struct CurvePoint {
  int insertions = 0;
  int canaries = 0;
  bool operator==(const CurvePoint&) const = default;
};

struct CurveSeries {
  std::string label;  // "<column>=<value>"
  std::vector<CurvePoint> points;  // strictly increasing insertions
  bool operator==(const CurveSeries&) const = default;
};

struct CurveSet {
  std::vector<CurveSeries> series;
  // Series whose y-values decrease somewhere along x.
  std::vector<std::string> warnings;
};

// Columns usable as a grouping key.
bool IsGroupingColumn(std::string_view column);

// Groups rows by the printed value of `group_by` and emits one series per
// group, ordered by key (numerically, "n/a" last). Throws
// ConfigError for an unknown column and DataError when a group holds two rows
// with the same insertion count.
CurveSet EmitCurves(const std::vector<ResultRow>& rows, std::string_view group_by,
                    CurveMetric metric = CurveMetric::kGreedy);

// label,insertions,canaries
void WriteCurvesCsv(const CurveSet& curves, std::ostream& out);

// Printed value of a column ("n/a" for absent values).
std::string ColumnValue(const ResultRow& row, std::string_view column);

}  // namespace memlab

#endif  // MEMLAB_RESULTS_H_
