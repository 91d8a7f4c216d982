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

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robustream/error.hpp"
#include "robustream/lab.hpp"
#include "robustream/stream.hpp"

namespace rs = robustream;
using rs::Mat;
using rs::Vec;

// Labeled sources cannot be passed where an estimator expects a stream.
static_assert(!std::is_base_of_v<rs::SampleStream, rs::LabeledStream>);
static_assert(!std::is_convertible_v<rs::LabeledStream&, rs::SampleStream&>);
static_assert(!std::is_convertible_v<rs::TvContaminator&, rs::SampleStream&>);

namespace {

std::string scenario(int d, std::uint64_t n, std::uint64_t seed, const std::string& inlier,
                     const std::string& adversary) {
  std::string js = "{\"d\":" + std::to_string(d) + ",\"n\":" + std::to_string(n) +
                   ",\"seed\":" + std::to_string(seed) + ",\"inlier\":" + inlier;
  if (!adversary.empty()) js += ",\"adversary\":" + adversary;
  return js + "}";
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

TEST(GenInliers, GaussianMean) {
  const std::uint64_t n = 40000;
  auto data = rs::generate(rs::scenario_from_json(scenario(4, n, 1, "{\"kind\":\"gaussian\"}", "")));
  Vec m = data.X.rowwise().mean();
  EXPECT_LE(m.cwiseAbs().maxCoeff(), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_TRUE(std::all_of(data.labels.begin(), data.labels.end(), [](auto l) { return l == 1; }));
}

TEST(GenInliers, ZeroCovarianceIsPointMass) {
  auto data = rs::generate(rs::scenario_from_json(
      scenario(3, 100, 2, "{\"kind\":\"gaussian\",\"mean\":[1,2,3],\"cov_diag\":0}", "")));
  Vec mu(3);
  mu << 1, 2, 3;
  for (Eigen::Index i = 0; i < data.X.cols(); ++i) ASSERT_TRUE((data.X.col(i).array() == mu.array()).all());
}

TEST(GenInliers, StudentTCovarianceBounded) {
  auto data = rs::generate(rs::scenario_from_json(
      scenario(5, 100000, 3, "{\"kind\":\"student_t\",\"df\":3}", "")));
  Vec w = Vec::Ones(data.X.cols());
  EXPECT_LE(oracle::top_eigenvalue(oracle::weighted_cov(data.X, w)), 1.3);
}

TEST(GenInliers, RademacherBoundedCov) {
  auto data = rs::generate(rs::scenario_from_json(
      scenario(6, 50000, 4, "{\"kind\":\"rademacher\"}", "")));
  EXPECT_TRUE((data.X.array().abs() == 1.0).all());
  Vec w = Vec::Ones(data.X.cols());
  EXPECT_LE(oracle::top_eigenvalue(oracle::weighted_cov(data.X, w)), 1.05);
}

TEST(GenInliers, RegressionRowsHaveLabelColumn) {
  auto sc = rs::scenario_from_json(
      scenario(3, 1000, 5, "{\"kind\":\"linear\",\"theta\":[1,0,-1],\"noise\":0}", ""));
  EXPECT_EQ(sc.point_dim(), 4);
  auto data = rs::generate(sc);
  for (Eigen::Index i = 0; i < data.X.cols(); ++i)
    ASSERT_NEAR(data.X(3, i), data.X(0, i) - data.X(2, i), 1e-12);
}

TEST(ContaminateTv, ZeroEpsUnchanged) {
  auto a = rs::generate(rs::scenario_from_json(scenario(3, 500, 6, "{\"kind\":\"gaussian\"}", "")));
  auto b = rs::generate(rs::scenario_from_json(scenario(
      3, 500, 6, "{\"kind\":\"gaussian\"}", "{\"kind\":\"mean_shift_cluster\",\"eps\":0,\"magnitude\":5}")));
  EXPECT_TRUE((a.X.array() == b.X.array()).all());
  EXPECT_TRUE(std::all_of(b.labels.begin(), b.labels.end(), [](auto l) { return l == 1; }));
}

TEST(ContaminateTv, OutlierFractionAndMean) {
  const std::uint64_t n = 100000;
  const double eps = 0.1, M = 6.0;
  auto data = rs::generate(rs::scenario_from_json(scenario(
      4, n, 7, "{\"kind\":\"gaussian\"}",
      "{\"kind\":\"mean_shift_cluster\",\"eps\":0.1,\"magnitude\":6,\"direction\":[0,1,0,0]}")));
  Vec sum = Vec::Zero(4);
  std::size_t nb = 0;
  for (Eigen::Index i = 0; i < data.X.cols(); ++i)
    if (!data.labels[i]) {
      sum += data.X.col(i);
      ++nb;
    }
  double frac = static_cast<double>(nb) / n;
  EXPECT_LE(std::abs(frac - eps), 3 * std::sqrt(eps / n));
  Vec target = M * Vec::Unit(4, 1);
  double se = 1.0 / std::sqrt(static_cast<double>(nb));
  EXPECT_LE(((sum / nb) - target).cwiseAbs().maxCoeff(), 3 * se);
  EXPECT_TRUE(data.X.allFinite());
  EXPECT_EQ(data.X.rows(), 4);
}

TEST(ContaminateTv, ObliviousToInlierSeed) {
  auto a = rs::scenario_from_json(scenario(
      3, 5000, 8, "{\"kind\":\"gaussian\"}",
      "{\"kind\":\"scaled_cluster\",\"eps\":0.2,\"magnitude\":10,\"spread\":0.5}"));
  a.adversary_seed = 99;
  auto b = a;
  b.seed = 1234;
  auto da = rs::generate(a), db = rs::generate(b);
  std::vector<Vec> oa, ob;
  for (Eigen::Index i = 0; i < da.X.cols(); ++i) {
    if (!da.labels[i]) oa.push_back(da.X.col(i));
    if (!db.labels[i]) ob.push_back(db.X.col(i));
  }
  ASSERT_EQ(oa.size(), ob.size());
  for (std::size_t k = 0; k < oa.size(); ++k) ASSERT_TRUE((oa[k].array() == ob[k].array()).all());
}

TEST(ContaminateTv, TailSubtractRemovesUpperTail) {
  auto data = rs::generate(rs::scenario_from_json(scenario(
      2, 50000, 9, "{\"kind\":\"gaussian\"}", "{\"kind\":\"tail_subtract_approx\",\"eps\":0.1}")));
  // The (1 - eps) quantile of N(0, 1) is about 1.2816.
  EXPECT_LE(data.X.row(0).maxCoeff(), 1.2816 + 0.05);
  EXPECT_TRUE(std::all_of(data.labels.begin(), data.labels.end(), [](auto l) { return l == 1; }));
}

TEST(ContaminateTv, SignFlipNeedsRegression) {
  EXPECT_EQ(code_of([] {
              rs::scenario_from_json(scenario(2, 10, 1, "{\"kind\":\"gaussian\"}",
                                              "{\"kind\":\"sign_flip_labels\",\"eps\":0.1}"));
            }),
            rs::ErrorCode::kInvalidConfig);
}

TEST(ContaminateTv, EpsRange) {
  EXPECT_EQ(code_of([] {
              rs::scenario_from_json(scenario(2, 10, 1, "{\"kind\":\"gaussian\"}",
                                              "{\"kind\":\"mean_shift_cluster\",\"eps\":0.5}"));
            }),
            rs::ErrorCode::kInvalidConfig);
}

TEST(ContaminateStrong, ZeroEpsIdentity) {
  auto sc = rs::scenario_from_json(scenario(3, 100, 10, "{\"kind\":\"gaussian\"}",
                                            "{\"kind\":\"mean_shift_cluster\",\"eps\":0,\"magnitude\":5}"));
  auto data = rs::generate(sc);
  auto r = rs::seeded_rng(1, 0);
  auto out = rs::contaminate_strong(data, sc, r);
  EXPECT_TRUE((out.X.array() == data.X.array()).all());
}

TEST(ContaminateStrong, ReplacesTopTenAlongDirection) {
  auto sc = rs::scenario_from_json(scenario(3, 100, 11, "{\"kind\":\"gaussian\"}",
                                            "{\"kind\":\"mean_shift_cluster\",\"eps\":0.1,"
                                            "\"magnitude\":50,\"direction\":[0,0,1]}"));
  auto clean_sc = sc;
  clean_sc.adversary.eps = 0.0;
  auto data = rs::generate(clean_sc);
  auto r = rs::seeded_rng(2, 0);
  auto out = rs::contaminate_strong(data, sc, r);
  ASSERT_EQ(out.X.cols(), 100);
  std::vector<std::pair<double, int>> proj;
  for (int i = 0; i < 100; ++i) proj.emplace_back(data.X(2, i), i);
  std::sort(proj.rbegin(), proj.rend());
  int replaced = 0;
  for (int i = 0; i < 100; ++i) replaced += !out.labels[i];
  EXPECT_EQ(replaced, 10);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(out.labels[proj[k].second], 0);
  for (int k = 10; k < 100; ++k) {
    int i = proj[k].second;
    EXPECT_EQ(out.labels[i], 1);
    EXPECT_TRUE((out.X.col(i).array() == data.X.col(i).array()).all());
  }
}

TEST(Stability, CopiesOfMeanPass) {
  Vec mu(2);
  mu << 1, -1;
  Mat X = mu.replicate(1, 50);
  auto r = rs::seeded_rng(3, 0);
  auto rep = rs::stability_check(X, 0.1, 1e-6, mu, 30, r);
  EXPECT_EQ(rep.max_mean_shift, 0.0);
  EXPECT_FALSE(rep.mean_violation);
}

TEST(Stability, TwoPointSetViolates) {
  Vec mu = Vec::Zero(2);
  Mat X(2, 2);
  X << 10, -10, 0, 0;
  auto r = rs::seeded_rng(4, 0);
  auto rep = rs::stability_check(X, 0.4, 0.5, mu, 10, r);
  EXPECT_TRUE(rep.mean_violation);
  // Removing 0.8 of one point leaves mean (0.2 * 10 - 10) / 1.2.
  EXPECT_NEAR(rep.max_mean_shift, 8.0 / 1.2, 1e-12);
}

TEST(Stability, GaussianSampleNoViolation) {
  const int d = 4;
  const double eps = 0.1;
  const auto n = static_cast<std::uint64_t>(10 * d / (eps * eps));
  auto data = rs::generate(rs::scenario_from_json(scenario(d, n, 12, "{\"kind\":\"gaussian\"}", "")));
  const double delta = eps * std::sqrt(std::log(1 / eps)) * 3;
  auto r = rs::seeded_rng(5, 0);
  auto rep = rs::stability_check(data.X, eps, delta, Vec::Zero(d), 1000, r);
  EXPECT_FALSE(rep.mean_violation) << rep.max_mean_shift;
  EXPECT_FALSE(rep.cov_violation) << rep.max_cov_deviation;
  EXPECT_EQ(rep.trials, 1002);
}

TEST(Metrics, Examples) {
  Vec t = Vec::Zero(3);
  EXPECT_EQ(rs::l2_error(t, t), 0.0);
  EXPECT_EQ(rs::l2_error(Vec::Unit(3, 0), t), 1.0);
  Mat a = Mat::Identity(2, 2), b = Mat::Identity(2, 2);
  a(0, 0) = 2.0;
  EXPECT_EQ(rs::frobenius_error(a, b), 1.0);
}

TEST(Metrics, ReportFieldsFromRun) {
  rs::EstimateResult run;
  run.mu = Vec::Unit(2, 1);
  run.iterations = 3;
  run.samples_used = 77;
  run.status = rs::RunStatus::kCertified;
  auto rep = rs::metrics(run.mu, Vec::Zero(2), run);
  EXPECT_EQ(rep.l2_error, 1.0);
  EXPECT_EQ(rep.iters, 3);
  EXPECT_EQ(rep.samples_used, 77u);
  EXPECT_TRUE(rep.certified);
}

TEST(UnlabeledView, SerialsConsecutive) {
  auto sc = rs::scenario_from_json(scenario(2, 50, 13, "{\"kind\":\"gaussian\"}",
                                            "{\"kind\":\"mean_shift_cluster\",\"eps\":0.2,\"magnitude\":3}"));
  auto lab = rs::open_scenario(sc);
  rs::UnlabeledView v(*lab);
  Vec x(2);
  int k = 0;
  while (v.next(x)) ++k;
  EXPECT_EQ(k, 50);
  EXPECT_TRUE(v.serials_consecutive());
  EXPECT_EQ(v.max_serial_seen(), 49u);
}

TEST(Scenario, JsonRoundTrip) {
  auto sc = rs::scenario_from_json(scenario(3, 10, 14, "{\"kind\":\"student_t\",\"df\":5}",
                                            "{\"kind\":\"scaled_cluster\",\"eps\":0.1,\"magnitude\":4}"));
  auto back = rs::scenario_from_json(rs::scenario_to_json(sc));
  EXPECT_EQ(rs::scenario_to_json(back), rs::scenario_to_json(sc));
  auto a = rs::generate(sc), b = rs::generate(back);
  EXPECT_TRUE((a.X.array() == b.X.array()).all());
}

TEST(Audit, RoundsOfBatchRun) {
  auto sc = rs::scenario_from_json(scenario(16, 6000, 15, "{\"kind\":\"gaussian\"}",
                                            "{\"kind\":\"mean_shift_cluster\",\"eps\":0.1,"
                                            "\"magnitude_sqrt_d\":2}"));
  auto data = rs::generate(sc);
  rs::FilterHistory h(Vec::Zero(16), 1e9);
  Mat U = Mat::Zero(1, 16);
  U(0, 0) = 1.0;
  h.rounds.emplace_back(Vec::Zero(16), rs::Sketch(U), 16.0, 50, 1e4);
  auto audit = rs::audit_rounds(data, h);
  ASSERT_EQ(audit.size(), 1u);
  double rin = 0, rout = 0, gin = 0;
  std::size_t ng = 0;
  for (Eigen::Index i = 0; i < data.X.cols(); ++i) {
    double w = oracle::naive_weight(h, data.X.col(i));
    if (data.labels[i]) {
      rin += 1 - w;
      gin += w;
      ++ng;
    } else {
      rout += 1 - w;
    }
  }
  const double n = static_cast<double>(data.X.cols());
  EXPECT_NEAR(audit[0].inlier_removed, rin / n, 1e-12);
  EXPECT_NEAR(audit[0].outlier_removed, rout / n, 1e-12);
  EXPECT_NEAR(audit[0].inlier_mass_after, gin / ng, 1e-12);
  EXPECT_GT(audit[0].outlier_removed, audit[0].inlier_removed + 3 * audit[0].sigma);
}
