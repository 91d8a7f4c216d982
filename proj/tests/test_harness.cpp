// Copyright 2026 The robustream Authors
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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "robustream/error.hpp"
#include "robustream/harness.hpp"
#include "robustream/io.hpp"

namespace rs = robustream;
using rs::Mat;
using rs::Vec;

namespace {

const char* kSmallSpec = R"({
  "scenario": {"d": 4, "n": 30000, "seed": 3,
               "inlier": {"kind": "gaussian"},
               "adversary": {"kind": "mean_shift_cluster", "eps": 0.1, "magnitude_sqrt_d": 2.0}},
  "estimator": "streaming",
  "config": {"eps": 0.1, "seed": 3},
  "baselines": ["sample_mean", "coordinate_median", "trimmed_mean"]
})";

std::string tmp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p.string();
}

int count_lines(const std::string& text, const std::string& prefix = "") {
  int k = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t e = text.find('\n', pos);
    if (e == std::string::npos) e = text.size();
    if (text.compare(pos, prefix.size(), prefix) == 0) ++k;
    pos = e + 1;
  }
  return k;
}

rs::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const rs::Error& e) {
    return e.code();
  }
  return static_cast<rs::ErrorCode>(0);
}

}  // namespace

TEST(Baselines, SampleMedianTrimmed) {
  Mat X(1, 5);
  X << 1, 2, 3, 4, 100;
  EXPECT_DOUBLE_EQ(rs::sample_mean(X)[0], 22.0);
  EXPECT_DOUBLE_EQ(rs::coordinate_median(X)[0], 3.0);
  EXPECT_DOUBLE_EQ(rs::trimmed_mean(X, 0.2)[0], 3.0);
}

TEST(Run, PointMassZeroError) {
  auto spec = rs::runspec_from_json(R"({
    "scenario": {"d": 3, "n": 20000, "seed": 1,
                 "inlier": {"kind": "gaussian", "mean": [1, 2, 3], "cov_diag": 0}},
    "estimator": "streaming", "config": {"eps": 0.1}})");
  auto rows = rs::run(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].l2_error, 0.0);
  EXPECT_TRUE(rows[0].certified);
}

TEST(Run, DeterministicRows) {
  auto spec = rs::runspec_from_json(kSmallSpec);
  spec.timing = false;
  std::string a, b;
  for (const auto& r : rs::run(spec)) a += rs::report_row(r);
  for (const auto& r : rs::run(spec)) b += rs::report_row(r);
  EXPECT_EQ(a, b);
  EXPECT_EQ(count_lines(a), 4);
}

TEST(Run, BaselinesReplayTheSameStream) {
  auto spec = rs::runspec_from_json(kSmallSpec);
  auto rows = rs::run(spec);
  ASSERT_EQ(rows.size(), 4u);
  const std::uint64_t used = rows[0].samples_used;
  auto data = rs::generate(spec.scenario);
  Mat head = data.X.leftCols(static_cast<Eigen::Index>(used));
  Vec truth = spec.scenario.true_mean();
  EXPECT_DOUBLE_EQ(rows[1].l2_error, rs::l2_error(rs::sample_mean(head), truth));
  EXPECT_DOUBLE_EQ(rows[2].l2_error, rs::l2_error(rs::coordinate_median(head), truth));
  EXPECT_DOUBLE_EQ(rows[3].l2_error, rs::l2_error(rs::trimmed_mean(head, 0.1), truth));
  EXPECT_LT(rows[0].l2_error, rows[1].l2_error);
}

TEST(Run, EstimatorFailureBecomesRow) {
  auto spec = rs::runspec_from_json(R"({
    "scenario": {"d": 3, "n": 500, "seed": 1, "inlier": {"kind": "gaussian"}},
    "estimator": "streaming", "config": {"eps": 0.1, "budget": 5000}})");
  auto rows = rs::run(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(rows[0].failure.find("StreamExhausted"), std::string::npos) << rows[0].failure;
  EXPECT_TRUE(std::isnan(rows[0].l2_error));
  EXPECT_FALSE(rows[0].failure.empty());
  EXPECT_NE(rs::report_row(rows[0]).find(",nan,"), std::string::npos);
}

TEST(Run, MismatchIsInvalidConfig) {
  EXPECT_EQ(code_of([] {
              auto spec = rs::runspec_from_json(R"({
                "scenario": {"d": 3, "n": 100, "seed": 1, "inlier": {"kind": "gaussian"}},
                "estimator": "linreg"})");
              rs::run(spec);
            }),
            rs::ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { rs::runspec_from_json(R"({"scenario": {"d": 2}, "bogus": 1})"); }),
            rs::ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { rs::parse_estimator("nope"); }), rs::ErrorCode::kInvalidConfig);
}

TEST(Run, SpecJsonRoundTripKeepsKey) {
  auto spec = rs::runspec_from_json(kSmallSpec);
  auto back = rs::runspec_from_json(rs::runspec_to_json(spec));
  EXPECT_EQ(rs::run_key(spec), rs::run_key(back));
  EXPECT_EQ(rs::run_key(spec).size(), 16u);
  auto other = spec;
  other.scenario.seed += 1;
  EXPECT_NE(rs::run_key(spec), rs::run_key(other));
}

TEST(Report, HeaderAndAppend) {
  EXPECT_EQ(rs::report_header().rfind(rs::kReportSchema, 0), 0u);
  EXPECT_NE(rs::report_header().find(
                "run_id,estimator,d,n,eps,seed,l2_error,iters,samples_used,peak_mem_floats,"
                "wall_ms,certified"),
            std::string::npos);
  auto path = tmp_path("rs_report_test.csv");
  rs::ExperimentReport r;
  r.run_id = "0123456789abcdef";
  r.estimator = "batch";
  rs::append_report(path, {r});
  rs::append_report(path, {r, r});
  std::string text = rs::read_text_file(path);
  EXPECT_EQ(count_lines(text, "# schema"), 1);
  EXPECT_EQ(count_lines(text, "0123456789abcdef"), 3);
  std::filesystem::remove(path);
}

TEST(Sweep, CellOverrides) {
  const std::string tpl = R"({"scenario": {"d": 4, "n": 1000, "seed": 1,
      "inlier": {"kind": "gaussian"}, "adversary": {"kind": "mean_shift_cluster", "eps": 0.1,
      "magnitude": 3}}, "estimator": "streaming", "config": {"eps": 0.1, "budget": 1000}})";
  double eps = 0.05;
  std::int64_t d = 7;
  std::uint64_t n = 5000, seed = 9;
  auto spec = rs::sweep_cell(tpl, &eps, &d, &n, &seed);
  EXPECT_EQ(spec.scenario.adversary.eps, 0.05);
  EXPECT_EQ(spec.config.eps, 0.05);
  EXPECT_EQ(spec.scenario.d, 7);
  EXPECT_EQ(spec.scenario.n, 5000u);
  EXPECT_EQ(spec.config.budget, 5000u);
  EXPECT_EQ(spec.scenario.seed, 9u);
  EXPECT_EQ(spec.config.seed, 9u);
  EXPECT_EQ(code_of([] { rs::grid_from_json(R"({"temperature": [1]})"); }),
            rs::ErrorCode::kInvalidConfig);
}

TEST(Sweep, ResumesByKey) {
  const std::string tpl = R"({"scenario": {"d": 4, "n": 20000, "seed": 1,
      "inlier": {"kind": "gaussian"}, "adversary": {"kind": "mean_shift_cluster", "eps": 0.1,
      "magnitude": 4}}, "estimator": "streaming", "config": {"eps": 0.1},
      "baselines": ["sample_mean"]})";
  auto path = tmp_path("rs_sweep_test.csv");
  auto first = rs::sweep(tpl, rs::grid_from_json(R"({"seed": [1, 2]})"), path);
  EXPECT_EQ(first.size(), 4u);
  auto again = rs::sweep(tpl, rs::grid_from_json(R"({"seed": [1, 2]})"), path);
  EXPECT_EQ(again.size(), 0u);
  auto more = rs::sweep(tpl, rs::grid_from_json(R"({"seed": [1, 2, 3], "eps": [0.1]})"), path);
  EXPECT_EQ(more.size(), 2u);
  std::string text = rs::read_text_file(path);
  EXPECT_EQ(count_lines(text, "# schema"), 1);
  EXPECT_EQ(count_lines(text) - 2, 6);
  std::filesystem::remove(path);
}
