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

#pragma once

#include <cstdint>
#include <functional>

#include "robustream/config.hpp"
#include "robustream/history.hpp"
#include "robustream/result.hpp"
#include "robustream/rng.hpp"
#include "robustream/stream.hpp"

namespace robustream {

// out = A * in for a d x m block of vectors.
using BlockMatvec = std::function<void(const Mat& in, Mat& out)>;

std::int64_t naive_sample_count(double tau);

// Returns the mean of all points whose 2R-ball holds a strict majority of
// the points. PruneFailed if there are none.
Vec naive_prune(const Mat& pts, double R);

// Draws naive_sample_count(tau) points and prunes them.
Vec naive_estimate(SampleStream& stream, double R, double tau);

// Median over `restarts` Gaussian starts of ||B v|| / ||v|| after `iters`
// multiplications.
double power_iteration(const BlockMatvec& B, Eigen::Index d, std::int64_t iters,
                       std::int64_t restarts, Rng& rng);

// Rows are (1/sqrt(L)) B^p z_j for Rademacher z_j.
Sketch build_sketch(const BlockMatvec& B, Eigen::Index d, std::int64_t p,
                    std::int64_t L, Rng& rng);

// E_P[w (1 - tau/r)^ell tau] over a finite point set.
double filter_expectation(const Vec& w, const Vec& tau, double r, std::int64_t ell);

// Smallest ell in [1, ell_max] with E(ell) <= 2T, by binary search on the
// non-increasing map E. FilterStuck if none.
std::int64_t downweighting_filter_exact(const std::function<double(std::int64_t)>& E,
                                        double T, std::int64_t ell_max);
std::int64_t downweighting_filter_exact(const Vec& w, const Vec& tau, double r, double T,
                                        std::int64_t ell_max);

// Weighted moments of a dataset under cached weights w. Sigma is the
// weighted covariance about the weighted mean; B = W^2 Sigma - shift I.
class MomentOracle {
 public:
  MomentOracle(const Mat& X, const Vec& w, double shift, Eigen::Index chunk);

  double mass() const { return mass_; }
  const Vec& mean() const { return mean_; }
  void apply_sigma(const Mat& V, Mat& out) const;
  void apply_B(const Mat& V, Mat& out) const;
  BlockMatvec matvec() const;

 private:
  const Mat& X_;
  const Vec& w_;
  double shift_;
  Eigen::Index chunk_;
  double mass_ = 0.0;
  double wsum_ = 0.0;
  Vec mean_;
};

EstimateResult robust_mean_batch(const Mat& X, const EstimatorConfig& config);

struct Certificate {
  double lambda_top = 0.0;
  double mean_shift_bound = 0.0;
};

Certificate certificate_from_covariance(const Mat& cov, double delta, double eps);
Certificate certificate_check(const Mat& X, const FilterHistory& h, double delta, double eps);

}  // namespace robustream
