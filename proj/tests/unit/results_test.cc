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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "memlab/error.h"
#include "test_util.h"

namespace memlab {
namespace {

ResultRow Row(std::string id, int insertions, int greedy) {
  ResultRow r;
  r.id = std::move(id);
  r.hidden_size = 128;
  r.insertions = insertions;
  r.vocab_size = 5000;
  r.dropout = 0.1;
  r.canaries_greedy = greedy;
  r.canaries_beam = greedy + 1;
  r.completion_nll = 3.25;
  r.test_nll = 5.5;
  r.test_accuracy = 12.5;
  return r;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ResultsCsvTest, HeaderMatchesGoldenFixture) {
  std::string golden = ReadFile(MEMLAB_TEST_DATA_DIR "/results_header.golden.csv");
  while (!golden.empty() && (golden.back() == '\n' || golden.back() == '\r')) golden.pop_back();
  EXPECT_EQ(golden, kResultsHeader);
  std::stringstream out;
  EmitCsv({Row("a", 1, 0)}, out);
  std::string first;
  std::getline(out, first);
  EXPECT_EQ(first, golden);
}

TEST(ResultsCsvTest, EmitsSortedRowsAndRoundTrips) {
  std::vector<ResultRow> rows;
  for (int i = 11; i >= 0; --i) rows.push_back(Row("r" + std::to_string(100 + i), i, i));
  rows[3].dp_epsilon = 8.0;
  rows[4].hidden_size.reset();
  rows[4].test_accuracy.reset();
  rows[5].l2_lambda = 1e-3;
  rows[6].scrub = true;
  rows[7].completion_nll = 0.1 + 0.2;  // needs 17 significant digits
  std::stringstream out;
  EmitCsv(rows, out);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
  std::stringstream in(text);
  const auto back = ParseCsv(in);
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.id < b.id; });
  EXPECT_EQ(back, sorted);
  EXPECT_NE(text.find(",n/a,"), std::string::npos);
  EXPECT_THROW(EmitCsv({}, out), DataError);
}

TEST(ResultsCsvTest, FormatsCompactly) {
  EXPECT_EQ(FormatDouble(0.0), "0");
  EXPECT_EQ(FormatDouble(3.9), "3.9");
  EXPECT_EQ(FormatDouble(1e-3), "0.001");
  EXPECT_EQ(FormatRow(Row("x", 32, 10)), "x,128,32,5000,0,0.1,0,n/a,10,11,3.25,5.5,12.5");
}

TEST(ResultsCsvTest, ParseErrors) {
  EXPECT_THROW(ParseRow("x,128,32"), ParseError);
  EXPECT_THROW(ParseRow("x,128,32,5000,0,0.1,2,n/a,10,11,3.25,5.5,12.5"), ParseError);
  EXPECT_THROW(ParseRow("x,abc,32,5000,0,0.1,0,n/a,10,11,3.25,5.5,12.5"), ParseError);
  std::stringstream wrong_header("id,foo\n");
  EXPECT_THROW(ParseCsv(wrong_header), ParseError);
}

TEST(ResultsCsvTest, FileWriteIsAtomic) {
  const auto dir = testing::TempDir("results");
  const std::string path = (dir / "r.csv").string();
  EmitCsvFile({Row("a", 1, 0), Row("b", 2, 1)}, path);
  EXPECT_EQ(ParseCsvFile(path).size(), 2u);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST(ReferenceResultsTest, ShippedTranscription) {
  const auto& rows = ReferenceResults();
  EXPECT_EQ(rows, ParseCsvFile(MEMLAB_TEST_DATA_DIR "/reference_results.csv"));
  const auto lstm = ReferenceLstmRows();
  EXPECT_EQ(lstm.size(), 120u);
  const auto aa = std::find_if(rows.begin(), rows.end(), [](auto& r) { return r.id == "aa"; });
  ASSERT_NE(aa, rows.end());
  EXPECT_EQ(aa->canaries_greedy, 10);
  EXPECT_EQ(aa->canaries_beam, 14);
  EXPECT_DOUBLE_EQ(aa->test_nll, 3.90);
  for (const auto& r : rows) {
    EXPECT_GE(r.canaries_greedy, 0);
    EXPECT_LE(r.canaries_beam, 50);
    EXPECT_GE(r.completion_nll, 0.0);
    EXPECT_GE(r.test_nll, 0.0);
  }
}

TEST(CurvesTest, BaselineSeries) {
  std::vector<ResultRow> base;
  for (const auto& r : ReferenceResults())
    if (r.id >= "aa" && r.id <= "ad") base.push_back(r);
  const CurveSet set = EmitCurves(base, "hidden_size");
  ASSERT_EQ(set.series.size(), 1u);
  EXPECT_EQ(set.series[0].label, "hidden_size=512");
  EXPECT_EQ(set.series[0].points,
            (std::vector<CurvePoint>{{32, 10}, {64, 29}, {128, 46}, {256, 50}}));
  EXPECT_TRUE(set.warnings.empty());
  const CurveSet beam = EmitCurves(base, "hidden_size", CurveMetric::kBeam);
  EXPECT_EQ(beam.series[0].points.front(), (CurvePoint{32, 14}));
}

TEST(CurvesTest, SingleRowAndWarnings) {
  EXPECT_EQ(EmitCurves({Row("a", 8, 3)}, "dropout").series[0].points.size(), 1u);
  const CurveSet set = EmitCurves({Row("a", 8, 3), Row("b", 16, 2)}, "scrub");
  EXPECT_EQ(set.warnings.size(), 1u);
  EXPECT_THROW(EmitCurves({Row("a", 8, 3), Row("b", 8, 2)}, "scrub"), DataError);
  EXPECT_THROW(EmitCurves({Row("a", 8, 3)}, "canaries_beam"), ConfigError);
}

TEST(CurvesTest, RegroupsL2Rows) {
  // Rows of the L2 table at hidden size 512: one series per lambda, each with
  // the four insertion counts, ordered by lambda.
  std::vector<ResultRow> rows;
  for (const auto& r : ReferenceLstmRows())
    if (r.hidden_size == 512 && r.l2_lambda > 0) rows.push_back(r);
  const CurveSet set = EmitCurves(rows, "l2_lambda");
  ASSERT_GE(set.series.size(), 2u);
  for (const auto& s : set.series) {
    EXPECT_EQ(s.points.size(), 4u) << s.label;
    EXPECT_EQ(s.points.front().insertions, 32);
    EXPECT_EQ(s.points.back().insertions, 256);
  }
  std::stringstream csv;
  WriteCurvesCsv(set, csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "label,insertions,canaries");
}

}  // namespace
}  // namespace memlab
