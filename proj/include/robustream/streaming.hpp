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
#include "robustream/ledger.hpp"
#include "robustream/result.hpp"
#include "robustream/rng.hpp"
#include "robustream/stream.hpp"

namespace robustream {

// Budgeted access to a stream. Raw draws come from P; weighted draws come
// from P_t (the history's weights) by rejection. Accepted points are
// buffered one chunk at a time and dropped whenever the history changes.
class DrawSource {
 public:
  // budget == 0 means no cap beyond the stream itself.
  DrawSource(SampleStream& stream, std::uint64_t budget, Eigen::Index chunk, Rng& rng);

  void set_history(const FilterHistory* h);
  const FilterHistory* history() const { return hist_; }
  Eigen::Index dim() const { return d_; }
  Eigen::Index chunk() const { return chunk_; }
  std::uint64_t used() const { return used_; }
  std::uint64_t remaining() const;

  // Fills the first `want` columns of out (out must have >= want columns).
  // StreamExhausted if the budget or the stream runs out first.
  void raw(Mat& out, Eigen::Index want);
  void weighted(Mat& out, Eigen::Index count);

  std::uint64_t weighted_raw_draws() const { return wraw_; }
  std::uint64_t weighted_accepted() const { return wacc_; }

 private:
  void refill();
  SampleStream& stream_;
  std::uint64_t budget_;
  Eigen::Index chunk_;
  Eigen::Index d_;
  Rng& rng_;
  const FilterHistory* hist_ = nullptr;
  std::uint64_t used_ = 0;
  Mat rawbuf_, accbuf_;
  Vec wbuf_;
  Eigen::Index acc_pos_ = 0, acc_len_ = 0;
  std::uint64_t wraw_ = 0, wacc_ = 0;
  MemToken mem_;
};

// One draw from P_t: keeps reading until a point is accepted with
// probability w_t(x). h == nullptr accepts everything.
Vec rejection_sample(SampleStream& stream, const FilterHistory* h, Rng& rng);

// Mean of w_t over `n` raw draws.
double estimate_weight_mass(DrawSource& src, std::int64_t n);

// V <- Bhat_p ... Bhat_1 V, each factor built from `pairs` fresh pair
// differences (X - X')/sqrt(2) drawn from P_t:
//   Bhat_k v = W^2 (1/pairs) sum y y^T v - shift v.
void fresh_chain(DrawSource& src, Mat& V, std::int64_t p, std::int64_t pairs, double W,
                 double shift);

// Single-vector form: estimates W from batch_n raw draws, then applies the
// chain with batch_n pairs per factor.
Vec fresh_batch_matvec(SampleStream& stream, const FilterHistory& h,
                       const EstimatorConfig& resolved, const Vec& z, Rng& rng);

// Median over `repeats` Gaussian vectors g of ||M g||^{1/p}; apply_M maps a
// d x repeats block in place.
double lambda_hat_power(const std::function<void(Mat&)>& apply_M, Eigen::Index d,
                        std::int64_t p, std::int64_t repeats, Rng& rng);

double lambda_hat_streaming(SampleStream& stream, const FilterHistory& h,
                            const EstimatorConfig& resolved, Rng& rng);

// Median over `groups` consecutive groups of the mean of
// w(X) (1 - tau(X)/r)^ell tau(X) on n raw draws from P.
double stopping_estimator(DrawSource& src, const FilterRound& draft, std::int64_t ell,
                          std::int64_t n, int groups);
double stopping_estimator(SampleStream& stream, const FilterHistory& h,
                          const FilterRound& draft, std::int64_t ell, std::int64_t n,
                          int groups, Rng& rng);

// Binary search on {1..ell_max}: f(l) > 9T discards smaller values, else
// larger, until two remain; returns one with 4T <= f <= 36T. If the search
// collapses onto 1 with f(1) < 4T the condition already holds and 1 is
// returned. FilterStuck otherwise.
std::int64_t downweighting_filter_approx(const std::function<double(std::int64_t)>& f,
                                         double T, std::int64_t ell_max);

// Group means of m = 20 trace_bound / delta^2 draws from P_t, pruned with
// radius delta. When cap > 0 limits the total draws, m shrinks and the
// prune radius grows to sqrt(20 trace_bound / m).
Vec mean_estimate_heavy(DrawSource& src, double delta, double trace_bound, int groups,
                        std::uint64_t cap);
Vec mean_estimate_heavy(SampleStream& stream, const FilterHistory* h, double delta,
                        double tau, double trace_bound, std::uint64_t cap, Rng& rng);

double streaming_trace_bound(Eigen::Index d, double eps, double delta, double R);

// Single-pass estimator. Requires config.budget > 0. When a ledger is
// given, all estimator state is charged to it.
EstimateResult robust_mean_streaming(SampleStream& stream, const EstimatorConfig& config,
                                     MemoryLedger* ledger = nullptr);

// Multi-pass variant over a re-iterable source. Weights are recomputed from
// the stored rounds on every pass.
EstimateResult robust_mean_multipass(ReiterableSource& source, const EstimatorConfig& config,
                                     MemoryLedger* ledger = nullptr);

}  // namespace robustream
