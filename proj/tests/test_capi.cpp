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

// Uses only the C header, like any foreign caller would.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "robustream/robustream.h"

namespace {

std::string tmp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p.string();
}

const char* kScenario =
    R"({"d": 8, "n": 100000, "seed": 4, "inlier": {"kind": "gaussian"},
        "adversary": {"kind": "mean_shift_cluster", "eps": 0.1, "magnitude_sqrt_d": 2.0}})";

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(rs_version(), "");
  EXPECT_STREQ(rs_status_name(RS_OK), "ok");
  EXPECT_STRNE(rs_status_name(RS_STREAM_EXHAUSTED), "");
}

TEST(CApi, ConfigSetGetAndValidation) {
  rs_config* c = nullptr;
  ASSERT_EQ(rs_config_new(&c), RS_OK);
  ASSERT_EQ(rs_config_set(c, "eps", 0.2), RS_OK);
  double v = 0;
  ASSERT_EQ(rs_config_get(c, "eps", &v), RS_OK);
  EXPECT_EQ(v, 0.2);
  EXPECT_EQ(rs_config_set(c, "no_such_key", 1.0), RS_INVALID_CONFIG);
  EXPECT_STRNE(rs_last_error(), "");
  char* js = nullptr;
  ASSERT_EQ(rs_config_to_json(c, &js), RS_OK);
  rs_config* c2 = nullptr;
  ASSERT_EQ(rs_config_from_json(js, &c2), RS_OK);
  ASSERT_EQ(rs_config_get(c2, "eps", &v), RS_OK);
  EXPECT_EQ(v, 0.2);
  rs_string_free(js);
  rs_config_free(c2);
  rs_config_free(c);
  EXPECT_EQ(rs_config_from_json("{not json", &c), RS_INVALID_CONFIG);
}

TEST(CApi, NullArgumentsRejected) {
  EXPECT_EQ(rs_config_new(nullptr), RS_INVALID_INPUT);
  EXPECT_EQ(rs_estimate_streaming(nullptr, nullptr, nullptr), RS_INVALID_INPUT);
  rs_config_free(nullptr);
  rs_stream_free(nullptr);
  rs_result_free(nullptr);
}

TEST(CApi, BatchOnBuffer) {
  const int n = 400, d = 3;
  std::vector<double> buf(n * d, 0.0);
  for (int i = 0; i < n; ++i) buf[i * d + 1] = 2.0;
  rs_config* c = nullptr;
  ASSERT_EQ(rs_config_new(&c), RS_OK);
  rs_result* r = nullptr;
  ASSERT_EQ(rs_estimate_batch(buf.data(), n, d, c, &r), RS_OK);
  ASSERT_EQ(rs_result_dim(r), d);
  std::vector<double> mu(d);
  ASSERT_EQ(rs_result_mu(r, mu.data(), d), RS_OK);
  EXPECT_EQ(mu[1], 2.0);
  EXPECT_EQ(rs_result_status(r), RS_RUN_CERTIFIED);
  EXPECT_EQ(rs_result_mu(r, mu.data(), 1), RS_INVALID_INPUT);
  rs_result_free(r);
  rs_config_free(c);
}

TEST(CApi, StreamingOnScenario) {
  rs_scenario* s = nullptr;
  ASSERT_EQ(rs_scenario_from_json(kScenario, &s), RS_OK);
  EXPECT_EQ(rs_scenario_point_dim(s), 8);
  EXPECT_EQ(rs_scenario_size(s), 100000u);
  rs_stream* st = nullptr;
  ASSERT_EQ(rs_stream_open_scenario(s, &st), RS_OK);
  rs_config* c = nullptr;
  ASSERT_EQ(rs_config_new(&c), RS_OK);
  rs_config_set(c, "eps", 0.1);
  rs_config_set(c, "budget", 100000);
  rs_result* r = nullptr;
  ASSERT_EQ(rs_estimate_streaming(st, c, &r), RS_OK) << rs_last_error();
  std::vector<double> mu(8), truth(8);
  rs_result_mu(r, mu.data(), 8);
  ASSERT_EQ(rs_scenario_true_mean(s, truth.data(), 8), RS_OK);
  for (int i = 0; i < 8; ++i) mu[i] -= truth[i];
  EXPECT_LE(norm(mu), 0.8);
  EXPECT_LE(rs_stream_consumed(st), 100000u);
  EXPECT_EQ(rs_result_samples_used(r), rs_stream_consumed(st));
  EXPECT_GT(rs_result_peak_mem_floats(r), 0u);
  char* js = nullptr;
  ASSERT_EQ(rs_result_to_json(r, &js), RS_OK);
  EXPECT_NE(std::string(js).find("\"history\""), std::string::npos);
  rs_string_free(js);
  rs_result_free(r);
  rs_config_free(c);
  rs_stream_free(st);
  rs_scenario_free(s);
}

TEST(CApi, FileRoundTripAndModes) {
  rs_scenario* s = nullptr;
  ASSERT_EQ(rs_scenario_from_json(kScenario, &s), RS_OK);
  auto bin = tmp_path("rs_capi.bin");
  ASSERT_EQ(rs_scenario_generate(s, bin.c_str(), "bin", 0), RS_OK);
  rs_config* c = nullptr;
  rs_config_new(&c);
  rs_config_set(c, "eps", 0.1);
  for (const char* mode : {"streaming", "batch", "multipass"}) {
    rs_result* r = nullptr;
    ASSERT_EQ(rs_estimate_file(bin.c_str(), "bin", 0, mode, c, &r), RS_OK)
        << mode << ": " << rs_last_error();
    std::vector<double> mu(8);
    rs_result_mu(r, mu.data(), 8);
    EXPECT_LE(norm(mu), 0.8) << mode;
    if (std::string(mode) == "multipass") EXPECT_GT(rs_result_passes(r), 0u);
    rs_result_free(r);
  }
  rs_result* r = nullptr;
  EXPECT_EQ(rs_estimate_file(bin.c_str(), "bin", 0, "sideways", c, &r), RS_INVALID_CONFIG);
  EXPECT_EQ(rs_estimate_file("/nonexistent/x.bin", "bin", 0, "batch", c, &r), RS_IO);
  std::filesystem::remove(bin);
  rs_config_free(c);
  rs_scenario_free(s);
}

TEST(CApi, StreamFromBufferExhausts) {
  std::vector<double> buf(10 * 2, 1.0);
  rs_stream* st = nullptr;
  ASSERT_EQ(rs_stream_from_buffer(buf.data(), 10, 2, &st), RS_OK);
  EXPECT_EQ(rs_stream_dim(st), 2);
  rs_config* c = nullptr;
  rs_config_new(&c);
  rs_config_set(c, "budget", 5000);
  rs_result* r = nullptr;
  EXPECT_EQ(rs_estimate_streaming(st, c, &r), RS_STREAM_EXHAUSTED);
  EXPECT_EQ(r, nullptr);
  rs_config_free(c);
  rs_stream_free(st);
}

TEST(CApi, CovarianceAndByzantine) {
  std::vector<double> buf(1000 * 2);
  for (int i = 0; i < 1000; ++i) {
    buf[2 * i] = 1.0;
    buf[2 * i + 1] = -2.0;
  }
  rs_stream* st = nullptr;
  rs_stream_from_buffer(buf.data(), 1000, 2, &st);
  rs_config* c = nullptr;
  rs_config_new(&c);
  rs_config_set(c, "budget", 1000);
  rs_result* r = nullptr;
  ASSERT_EQ(rs_estimate_covariance(st, c, &r), RS_OK) << rs_last_error();
  ASSERT_EQ(rs_result_dim(r), 4);
  std::vector<double> m(4);
  rs_result_mu(r, m.data(), 4);
  EXPECT_NEAR(m[0], 1.0, 1e-12);
  EXPECT_NEAR(m[1], -2.0, 1e-12);
  EXPECT_NEAR(m[3], 4.0, 1e-12);
  rs_result_free(r);
  rs_stream_free(st);

  std::vector<double> workers = {0.0, 0.1, 5.0};
  double out = 0;
  ASSERT_EQ(rs_byzantine_aggregate(workers.data(), 3, 1, 1.0 / 3.0, c, &out), RS_OK);
  EXPECT_GE(out, 0.0);
  EXPECT_LE(out, 0.1);
  rs_config_free(c);
}

TEST(CApi, HarnessRunAndSweep) {
  char* hdr = nullptr;
  ASSERT_EQ(rs_report_header(&hdr), RS_OK);
  EXPECT_EQ(std::string(hdr).rfind("# schema: robustream-report/1", 0), 0u);
  rs_string_free(hdr);
  const char* spec = R"({"scenario": {"d": 4, "n": 20000, "seed": 2,
      "inlier": {"kind": "gaussian"}, "adversary": {"kind": "mean_shift_cluster",
      "eps": 0.1, "magnitude": 4}}, "estimator": "streaming", "config": {"eps": 0.1},
      "baselines": ["sample_mean"]})";
  char* a = nullptr;
  char* b = nullptr;
  ASSERT_EQ(rs_run_spec(spec, 1, &a), RS_OK) << rs_last_error();
  ASSERT_EQ(rs_run_spec(spec, 1, &b), RS_OK);
  EXPECT_STREQ(a, b);
  rs_string_free(a);
  rs_string_free(b);
  EXPECT_EQ(rs_run_spec("{\"estimator\": 3}", 1, &a), RS_INVALID_CONFIG);

  auto out = tmp_path("rs_capi_sweep.csv");
  std::uint64_t rows = 0;
  ASSERT_EQ(rs_sweep(spec, R"({"seed": [5, 6]})", out.c_str(), 1, &rows), RS_OK);
  EXPECT_EQ(rows, 4u);
  ASSERT_EQ(rs_sweep(spec, R"({"seed": [5, 6]})", out.c_str(), 1, &rows), RS_OK);
  EXPECT_EQ(rows, 0u);
  std::filesystem::remove(out);
}
