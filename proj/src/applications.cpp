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

#include "robustream/applications.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "robustream/batch_filter.hpp"
#include "robustream/error.hpp"
#include "robustream/linalg.hpp"
#include "robustream/streaming.hpp"

namespace robustream {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

class ScaledStream : public SampleStream {
 public:
  ScaledStream(SampleStream& inner, double scale)
      : SampleStream(inner.dimension()), inner_(inner), inv_(1.0 / scale) {}

 protected:
  bool produce(double* out) override {
    if (!inner_.next(out)) return false;
    for (Eigen::Index i = 0; i < dimension(); ++i) out[i] *= inv_;
    return true;
  }

 private:
  SampleStream& inner_;
  double inv_;
};

Vec scaled_streaming_mean(SampleStream& grads, const EstimatorConfig& config, double scale) {
  ScaledStream s(grads, scale);
  return robust_mean_streaming(s, config).mu * scale;
}

bool recoverable(const Error& e) {
  return e.code() == ErrorCode::kPruneFailed || e.code() == ErrorCode::kFilterStuck ||
         e.code() == ErrorCode::kNumericalFailure;
}

}  // namespace

KroneckerStream::KroneckerStream(SampleStream& inner, double scale)
    : SampleStream(inner.dimension() * inner.dimension()),
      inner_(inner),
      scale_(scale),
      x_(inner.dimension()) {}

bool KroneckerStream::produce(double* out) {
  if (!inner_.next(x_.data())) return false;
  const Eigen::Index d = x_.size();
  Eigen::Map<Mat> m(out, d, d);
  m.noalias() = scale_ * x_ * x_.transpose();
  return true;
}

Mat robust_covariance_bounded(SampleStream& stream, const EstimatorConfig& config,
                              const CovarianceOptions& opt, EstimateResult* run) {
  const Eigen::Index d = stream.dimension();
  if (d > opt.max_dim)
    fail(ErrorCode::kInvalidConfig, "covariance dimension " + std::to_string(d) +
                                        " exceeds max_dim " + std::to_string(opt.max_dim));
  const double s = std::sqrt(0.5);
  KroneckerStream ks(stream, s);
  EstimateResult r = robust_mean_streaming(ks, config);
  Mat m = Eigen::Map<const Mat>(r.mu.data(), d, d) / s;
  Mat sym = 0.5 * (m + m.transpose());
  if (opt.psd_project) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    sym = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
          es.eigenvectors().transpose();
    sym = 0.5 * (sym + sym.transpose()).eval();
  }
  if (run) *run = std::move(r);
  return sym;
}

double linear_loss(const Vec& theta, const Eigen::Ref<const Vec>& x, double y) {
  const double res = theta.dot(x) - y;
  return 0.5 * res * res;
}

Vec linear_gradient(const Vec& theta, const Eigen::Ref<const Vec>& x, double y) {
  return (theta.dot(x) - y) * x;
}

double logistic_loss(const Vec& theta, const Eigen::Ref<const Vec>& x, double y) {
  const double t = theta.dot(x);
  return softplus(t) - y * t;
}

Vec logistic_gradient(const Vec& theta, const Eigen::Ref<const Vec>& x, double y) {
  return (sigmoid(theta.dot(x)) - y) * x;
}

double GradientOracleSpec::eta() const { return step_eta > 0.0 ? step_eta : 2.0 / (tau_l + tau_u); }

double GradientOracleSpec::kappa() const {
  const double e = eta();
  const double inner = 1.0 - 2.0 * e * tau_l * tau_u / (tau_l + tau_u);
  return std::sqrt(std::max(0.0, inner)) + e * alpha;
}

void GradientOracleSpec::validate() const {
  require(theta_radius > 0.0, ErrorCode::kInvalidConfig, "theta_radius must be positive");
  require(tau_l > 0.0 && tau_u > 0.0 && tau_l <= tau_u, ErrorCode::kInvalidConfig,
          "need 0 < tau_l <= tau_u");
  require(alpha >= 0.0 && beta >= 0.0, ErrorCode::kInvalidConfig, "alpha, beta must be >= 0");
  const double k = kappa();
  if (!(k >= 0.0 && k < 1.0))
    fail(ErrorCode::kInvalidConfig,
         "contraction factor kappa = " + std::to_string(k) + " is not in [0, 1)");
}

std::int64_t GradientOracleSpec::iterations() const {
  validate();
  require(beta > 0.0, ErrorCode::kInvalidConfig, "iteration count needs beta > 0");
  const double k = kappa();
  const double ratio = (1.0 - k) * 2.0 * theta_radius / beta;
  if (ratio <= 1.0) return 1;
  if (k == 0.0) return 1;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log(ratio) / -std::log(k))));
}

Vec project_ball(const Vec& theta, double r) {
  const double nrm = theta.norm();
  return nrm > r ? Vec(theta * (r / nrm)) : theta;
}

GdResult robust_gd(const GradientOracleSpec& oracle, const GradientFn& g, const Vec& theta0,
                   std::int64_t steps) {
  oracle.validate();
  const std::int64_t T = steps > 0 ? steps : oracle.iterations();
  const double eta = oracle.eta();
  GdResult res;
  Vec theta = project_ball(theta0, oracle.theta_radius);
  res.iterates.push_back(theta);
  for (std::int64_t t = 0; t < T; ++t) {
    Vec grad = g(theta, t);
    require(grad.size() == theta.size(), ErrorCode::kInvalidInput, "gradient has wrong dimension");
    theta = project_ball(theta - eta * grad, oracle.theta_radius);
    res.iterates.push_back(theta);
  }
  res.theta = theta;
  res.steps = T;
  return res;
}

GradientStream::GradientStream(SampleStream& data, LossKind kind, Vec theta, double scale)
    : SampleStream(data.dimension() - 1),
      data_(data),
      kind_(kind),
      theta_(std::move(theta)),
      inv_scale_(1.0 / scale),
      row_(data.dimension()) {
  require(theta_.size() == data.dimension() - 1, ErrorCode::kInvalidInput,
          "theta dimension must be data dimension - 1");
  require(kind != LossKind::kCustom, ErrorCode::kInvalidConfig,
          "gradient stream needs a built-in loss");
}

bool GradientStream::produce(double* out) {
  if (!data_.next(row_.data())) return false;
  const Eigen::Index d = theta_.size();
  auto x = row_.head(d);
  const double y = row_(d);
  const double t = theta_.dot(x);
  const double c = kind_ == LossKind::kLinearRegression ? t - y : sigmoid(t) - y;
  Eigen::Map<Vec>(out, d) = (c * inv_scale_) * x;
  return true;
}

LepskiResult lepski_search(const ScaledMeanFn& mean, double A, double B, double gamma,
                           const std::function<double(double)>& r_fn) {
  require(A > 0.0 && B >= A, ErrorCode::kInvalidConfig, "lepski needs 0 < A <= B");
  const double levels = std::log2(B / A);
  const double g = gamma / std::max(1.0, levels);
  std::vector<Vec> est;
  std::vector<double> sig;
  LepskiResult out;
  for (int j = 0;; ++j) {
    const double s = B / std::ldexp(1.0, j);
    if (s < A) break;
    Vec mu;
    try {
      mu = mean(s, g);
    } catch (const Error& e) {
      if (j == 0 || !recoverable(e)) throw;
      break;
    }
    ++out.calls;
    bool consistent = true;
    for (std::size_t k = 0; k < est.size() && consistent; ++k)
      consistent = (mu - est[k]).norm() <= r_fn(s) + r_fn(sig[k]);
    if (!consistent) break;
    est.push_back(std::move(mu));
    sig.push_back(s);
  }
  out.estimate = est.back();
  out.sigma_tilde = sig.back();
  return out;
}

Vec robust_gradient_estimator(SampleStream& grads, const EstimatorConfig& config,
                              std::optional<double> sigma, const LepskiOptions& lepski,
                              int* calls) {
  if (sigma) {
    require(*sigma > 0.0, ErrorCode::kInvalidConfig, "gradient scale must be positive");
    if (calls) ++*calls;
    return scaled_streaming_mean(grads, config, *sigma);
  }
  const double d = static_cast<double>(grads.dimension());
  const double noise = std::sqrt(d / static_cast<double>(std::max<std::uint64_t>(config.budget, 1)));
  const double rate = std::sqrt(std::max(config.eps, 0.0)) + noise;
  auto r_fn = [&](double s) { return lepski.r_mult * s * rate; };
  auto fn = [&](double s, double g) {
    EstimatorConfig c = config;
    c.tau = std::min(c.tau, g);
    return scaled_streaming_mean(grads, c, s);
  };
  LepskiResult lr = lepski_search(fn, lepski.A, lepski.B, lepski.gamma, r_fn);
  if (calls) *calls += lr.calls;
  return lr.estimate;
}

Vec robust_gradient_estimator(const Mat& grads, const EstimatorConfig& config,
                              std::optional<double> sigma) {
  const double s = sigma ? *sigma : 1.0;
  require(s > 0.0, ErrorCode::kInvalidConfig, "gradient scale must be positive");
  return robust_mean_batch(grads / s, config).mu * s;
}

namespace {

RegressionResult regression(SampleStream& data, const RegressionOptions& opt, const Vec& theta0,
                            LossKind kind) {
  require(data.dimension() == theta0.size() + 1, ErrorCode::kInvalidInput,
          "regression rows must have d + 1 entries");
  GradientOracleSpec oracle = opt.oracle;
  oracle.loss_kind = kind;
  RegressionResult out;
  GradientFn g = [&](const Vec& theta, std::int64_t step) -> Vec {
    EstimatorConfig c = opt.config;
    c.seed = opt.config.seed + 7919 * static_cast<std::uint64_t>(step + 1);
    if (!opt.robust) {
      require(c.budget > 0, ErrorCode::kInvalidConfig, "gradient slice size must be > 0");
      GradientStream gs(data, kind, theta, 1.0);
      KahanMatrix acc(theta.size(), 1);
      Vec v(theta.size());
      std::uint64_t k = 0;
      for (; k < c.budget && gs.next(v.data()); ++k) acc.add(v);
      require(k > 0, ErrorCode::kStreamExhausted, "no data for the gradient step");
      ++out.estimator_calls;
      return acc.value().col(0) / static_cast<double>(k);
    }
    GradientStream gs(data, kind, theta, 1.0);
    return robust_gradient_estimator(gs, c, opt.sigma, opt.lepski, &out.estimator_calls);
  };
  out.gd = robust_gd(oracle, g, theta0, opt.steps);
  out.theta = out.gd.theta;
  return out;
}

}  // namespace

RegressionResult linear_regression_robust(SampleStream& data, const RegressionOptions& opt,
                                          const Vec& theta0) {
  return regression(data, opt, theta0, LossKind::kLinearRegression);
}

RegressionResult logistic_regression_robust(SampleStream& data, const RegressionOptions& opt,
                                            const Vec& theta0) {
  return regression(data, opt, theta0, LossKind::kLogisticRegression);
}

double coordinate_mad_scale(const Mat& X) {
  const Eigen::Index d = X.rows(), m = X.cols();
  require(m > 0, ErrorCode::kInvalidInput, "no workers");
  std::vector<double> row(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) row[static_cast<std::size_t>(i)] = X(j, i);
    const double med = median(row);
    for (auto& v : row) v = std::abs(v - med);
    const double mad = 1.4826 * median(row);
    acc += mad * mad;
  }
  return std::sqrt(acc / static_cast<double>(d));
}

Vec byzantine_aggregate(const Mat& workers, double eps, const EstimatorConfig& config,
                        const ByzantineOptions& opt) {
  require(workers.cols() > 0, ErrorCode::kInvalidInput, "no workers");
  double s = opt.sigma ? *opt.sigma : coordinate_mad_scale(workers);
  if (!(s > 0.0)) s = 1.0;
  EstimatorConfig c = config;
  c.eps = eps;
  return robust_mean_batch(workers / s, c).mu * s;
}

}  // namespace robustream
