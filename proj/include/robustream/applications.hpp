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
#include <optional>
#include <vector>

#include "robustream/config.hpp"
#include "robustream/history.hpp"
#include "robustream/result.hpp"
#include "robustream/stream.hpp"

namespace robustream {

// ---- covariance ----

struct CovarianceOptions {
  std::int64_t max_dim = 24;  // d^2 stays at desk scale
  bool psd_project = false;
};

// Each point x is mapped to vec(x x^T)/sqrt(2) and fed to the streaming
// estimator; the estimate is rescaled, reshaped and symmetrized. Returns the
// second moment E[x x^T], which is the covariance for centered inliers.
Mat robust_covariance_bounded(SampleStream& stream, const EstimatorConfig& config,
                              const CovarianceOptions& opt = {}, EstimateResult* run = nullptr);

// Streams vec(x x^T) * scale for each x from the inner stream.
class KroneckerStream : public SampleStream {
 public:
  KroneckerStream(SampleStream& inner, double scale);

 protected:
  bool produce(double* out) override;

 private:
  SampleStream& inner_;
  double scale_;
  Vec x_;
};

// ---- gradients ----

enum class LossKind { kLinearRegression, kLogisticRegression, kCustom };

// Pointwise losses and gradients on a sample (x, y).
double linear_loss(const Vec& theta, const Eigen::Ref<const Vec>& x, double y);
Vec linear_gradient(const Vec& theta, const Eigen::Ref<const Vec>& x, double y);
double logistic_loss(const Vec& theta, const Eigen::Ref<const Vec>& x, double y);
Vec logistic_gradient(const Vec& theta, const Eigen::Ref<const Vec>& x, double y);

struct GradientOracleSpec {
  LossKind loss_kind = LossKind::kLinearRegression;
  double theta_radius = 1.0;
  double step_eta = 0.0;  // <= 0 means 2/(tau_l + tau_u)
  double tau_l = 1.0;
  double tau_u = 1.0;
  double alpha = 0.0;
  double beta = 0.0;

  double eta() const;
  double kappa() const;  // sqrt(1 - 2 eta tau_l tau_u/(tau_l + tau_u)) + eta alpha
  void validate() const;
  // ceil(log_{1/kappa}((1 - kappa) 2r / beta)), at least 1; needs beta > 0.
  std::int64_t iterations() const;
};

Vec project_ball(const Vec& theta, double r);

// g(theta, step) returns the gradient estimate used at that step.
using GradientFn = std::function<Vec(const Vec& theta, std::int64_t step)>;

struct GdResult {
  Vec theta;
  std::vector<Vec> iterates;  // theta^0 .. theta^T
  std::int64_t steps = 0;
};

// Projected gradient descent. steps <= 0 uses oracle.iterations().
GdResult robust_gd(const GradientOracleSpec& oracle, const GradientFn& g, const Vec& theta0,
                   std::int64_t steps = 0);

// Gradients of the pointwise loss at a fixed theta over a stream of
// (x, y) rows, scaled by 1/scale.
class GradientStream : public SampleStream {
 public:
  GradientStream(SampleStream& data, LossKind kind, Vec theta, double scale);

 protected:
  bool produce(double* out) override;

 private:
  SampleStream& data_;
  LossKind kind_;
  Vec theta_;
  double inv_scale_;
  Vec row_;
};

// ---- Lepski ----

// mean(sigma_tilde, gamma) -> estimate.
using ScaledMeanFn = std::function<Vec(double sigma_tilde, double gamma)>;

struct LepskiResult {
  Vec estimate;
  double sigma_tilde = 0.0;  // scale of the returned estimate
  int calls = 0;
};

LepskiResult lepski_search(const ScaledMeanFn& mean, double A, double B, double gamma,
                           const std::function<double(double)>& r_fn);

struct LepskiOptions {
  double A = 0.25;
  double B = 20.0;
  double gamma = 0.05;
  double r_mult = 2.0;  // r(s) = r_mult * s * (sqrt(eps) + sqrt(d / budget))
};

// Streaming robust mean of gradient vectors. With sigma known the stream is
// rescaled by 1/sigma; otherwise the scale is found by Lepski search, each
// call reading a fresh slice of config.budget points.
Vec robust_gradient_estimator(SampleStream& grads, const EstimatorConfig& config,
                              std::optional<double> sigma, const LepskiOptions& lepski = {},
                              int* calls = nullptr);
// Finite set of gradients (columns): batch estimator.
Vec robust_gradient_estimator(const Mat& grads, const EstimatorConfig& config,
                              std::optional<double> sigma);

// ---- regression ----

struct RegressionOptions {
  GradientOracleSpec oracle;
  EstimatorConfig config;         // config.budget is the per-call slice size
  std::int64_t steps = 0;         // <= 0 uses oracle.iterations()
  std::optional<double> sigma;    // known gradient scale; unset uses Lepski
  LepskiOptions lepski;
  bool robust = true;             // false: plain sample-mean gradients
};

struct RegressionResult {
  Vec theta;
  GdResult gd;
  int estimator_calls = 0;
};

// data rows are (x, y) with d + 1 entries.
RegressionResult linear_regression_robust(SampleStream& data, const RegressionOptions& opt,
                                          const Vec& theta0);
RegressionResult logistic_regression_robust(SampleStream& data, const RegressionOptions& opt,
                                            const Vec& theta0);

// ---- Byzantine aggregation ----

struct ByzantineOptions {
  std::optional<double> sigma;  // honest per-coordinate scale; unset = coordinate MAD
};

// workers: d x m, one gradient per column.
Vec byzantine_aggregate(const Mat& workers, double eps, const EstimatorConfig& config,
                        const ByzantineOptions& opt = {});

// Robust per-coordinate scale: root mean square of 1.4826 * MAD_j.
double coordinate_mad_scale(const Mat& X);

}  // namespace robustream
