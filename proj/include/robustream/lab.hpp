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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "robustream/history.hpp"
#include "robustream/result.hpp"
#include "robustream/rng.hpp"
#include "robustream/stream.hpp"

namespace robustream {

enum class InlierKind {
  kGaussian,    // N(mean, cov)
  kStudentT,    // mean + coordinates t_df scaled to unit variance
  kRademacher,  // mean + coordinates uniform on {-1, +1}
  kLinear,      // (x, y) with x ~ N(0, I), y = <theta, x> + noise z
  kLogistic,    // (x, y) with x ~ N(0, I), y ~ Bernoulli(sigmoid(<theta, x>))
};

struct InlierSpec {
  InlierKind kind = InlierKind::kGaussian;
  Vec mean;      // empty = 0
  Vec cov_diag;  // empty = ones; ignored when cov is set
  Mat cov;       // optional full covariance (gaussian)
  double df = 3.0;
  Vec theta;     // regression kinds
  double noise = 1.0;
  double x_scale = 1.0;  // regression covariate scale
};

enum class AdversaryKind {
  kNone,
  kMeanShiftCluster,   // N(mean + M dir, cov)
  kScaledCluster,      // mean + M dir + spread * N(0, I)
  kTailSubtractApprox, // deletes the top eps tail along dir; no added points
  kSignFlipLabels,     // regression pair (M x, flipped y)
  kWorkerCollusion,    // point mass at mean + M dir
};

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::kNone;
  double magnitude = 0.0;
  Vec direction;  // empty = e_1; normalized on use
  double eps = 0.0;
  double spread = 0.1;
};

struct Scenario {
  std::int64_t d = 1;  // point dimension (regression kinds emit d + 1)
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> adversary_seed;  // defaults to seed
  InlierSpec inlier;
  AdversarySpec adversary;

  std::int64_t point_dim() const;
  Vec true_mean() const;  // mean of the inlier distribution
};

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
const char* adversary_name(AdversaryKind k);
const char* inlier_name(InlierKind k);

struct LabeledPoint {
  Point point;
  bool is_inlier = true;
};

// Labeled point source. Deliberately unrelated to SampleStream so labeled
// data cannot be handed to an estimator.
class LabeledStream {
 public:
  explicit LabeledStream(Eigen::Index dim) : dim_(dim) {}
  virtual ~LabeledStream() = default;
  Eigen::Index dimension() const { return dim_; }
  // serial numbers start at 0 and increase by one per emitted point.
  bool next(double* x, bool* is_inlier, std::uint64_t* serial = nullptr);
  std::optional<LabeledPoint> next_point();

 protected:
  virtual bool produce(double* x, bool* is_inlier) = 0;

 private:
  Eigen::Index dim_;
  std::uint64_t serial_ = 0;
};

// i.i.d. draws from the inlier distribution, all labeled inlier.
class InlierGenerator : public LabeledStream {
 public:
  InlierGenerator(std::int64_t d, InlierSpec spec, std::uint64_t n, Rng rng);
  void draw(double* x, Rng& rng) const;  // one draw with an external rng
  const InlierSpec& spec() const { return spec_; }

 protected:
  bool produce(double* x, bool* is_inlier) override;

 private:
  std::int64_t d_;
  InlierSpec spec_;
  Mat chol_;
  std::uint64_t left_;
  Rng rng_;
};

std::unique_ptr<InlierGenerator> gen_inliers(std::int64_t d, const InlierSpec& spec,
                                             std::uint64_t n, Rng rng);

// Each point is an inlier with probability 1 - eps, else an outlier from the
// adversary. Coins and outliers use the adversary rng only.
class TvContaminator : public LabeledStream {
 public:
  TvContaminator(std::unique_ptr<InlierGenerator> inliers, AdversarySpec adv, Rng adv_rng);

  void draw_outlier(double* x);

 protected:
  bool produce(double* x, bool* is_inlier) override;

 private:
  std::unique_ptr<InlierGenerator> in_;
  AdversarySpec adv_;
  Vec dir_;
  Vec center_;
  Rng rng_;
  double tail_cut_ = 0.0;
};

std::unique_ptr<TvContaminator> contaminate_tv(std::unique_ptr<InlierGenerator> inliers,
                                               const AdversarySpec& adv, Rng adv_rng);

// Scenario stream: gen_inliers + contaminate_tv with the scenario seeds.
std::unique_ptr<LabeledStream> open_scenario(const Scenario& s);
// Same distribution with an independent seed offset (for audits).
std::unique_ptr<LabeledStream> open_scenario(const Scenario& s, std::uint64_t seed_offset);

struct LabeledDataset {
  Mat X;
  std::vector<std::uint8_t> labels;  // 1 = inlier
};

LabeledDataset generate(const Scenario& s);
LabeledDataset drain(LabeledStream& s, std::uint64_t n);

// Replaces the floor(eps n) inliers with the largest projection on the
// adversary direction by adversarial points.
LabeledDataset contaminate_strong(const LabeledDataset& data, const Scenario& s, Rng& rng);

// Label-free view of a labeled stream; optionally checks that serial numbers
// are strictly increasing (no point is ever yielded twice).
class UnlabeledView : public SampleStream {
 public:
  explicit UnlabeledView(LabeledStream& inner);
  std::uint64_t max_serial_seen() const { return last_serial_; }
  bool serials_consecutive() const { return consecutive_; }

 protected:
  bool produce(double* out) override;

 private:
  LabeledStream& inner_;
  std::uint64_t last_serial_ = 0;
  bool any_ = false;
  bool consecutive_ = true;
};

struct StabilityReport {
  double max_mean_shift = 0.0;
  double max_cov_deviation = 0.0;
  bool mean_violation = false;
  bool cov_violation = false;
  int trials = 0;
};

StabilityReport stability_check(const Mat& X, double eps, double delta, const Vec& mu,
                                int trials, Rng& rng);

struct ExperimentReport {
  std::string run_id;
  std::string estimator;
  std::int64_t d = 0;
  std::uint64_t n = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double l2_error = 0.0;
  std::int64_t iters = 0;
  std::uint64_t samples_used = 0;
  std::uint64_t peak_mem_floats = 0;
  double wall_ms = 0.0;
  bool certified = false;
  std::string failure;  // empty on success
};

double l2_error(const Vec& estimate, const Vec& truth);
double frobenius_error(const Mat& estimate, const Mat& truth);
ExperimentReport metrics(const Vec& estimate, const Vec& truth, const EstimateResult& run);

// Post-hoc, label-aware audit of a finished run's filter rounds on a labeled
// sample. Sums are normalized by the sample size.
struct RoundAudit {
  double inlier_removed = 0.0;
  double outlier_removed = 0.0;
  double sigma = 0.0;           // standard error of outlier_removed - inlier_removed
  double inlier_mass_after = 0.0;  // E_G[w_{t+1}]
};

std::vector<RoundAudit> audit_rounds(const LabeledDataset& data, const FilterHistory& h);

}  // namespace robustream
