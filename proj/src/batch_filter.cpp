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

#include "robustream/batch_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "robustream/error.hpp"
#include "robustream/linalg.hpp"

namespace robustream {

std::int64_t naive_sample_count(double tau) {
  require(tau > 0.0 && tau < 1.0, ErrorCode::kInvalidConfig, "tau must lie in (0, 1)");
  return static_cast<std::int64_t>(std::ceil(200.0 * std::log(2.0 / tau)));
}

Vec naive_prune(const Mat& pts, double R) {
  const Eigen::Index k = pts.cols();
  require(k > 0, ErrorCode::kInvalidInput, "naive_prune: no points");
  require(R >= 0.0, ErrorCode::kInvalidInput, "naive_prune: negative radius");
  Vec sq = pts.colwise().squaredNorm().transpose();
  Mat gram = pts.transpose() * pts;
  const double r2 = 4.0 * R * R;
  Vec sum = Vec::Zero(pts.rows());
  Eigen::Index dense = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::Index cnt = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      double d2 = sq(i) + sq(j) - 2.0 * gram(i, j);
      if (i == j || d2 <= r2) ++cnt;
    }
    if (2 * cnt > k) {
      sum += pts.col(i);
      ++dense;
    }
  }
  if (dense == 0) fail(ErrorCode::kPruneFailed, "naive_prune: no point has a dense 2R-ball");
  return sum / static_cast<double>(dense);
}

Vec naive_estimate(SampleStream& stream, double R, double tau) {
  const std::int64_t k = naive_sample_count(tau);
  Mat pts(stream.dimension(), k);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(pts.size()));
  for (std::int64_t i = 0; i < k; ++i)
    if (!stream.next(pts.col(i)))
      fail(ErrorCode::kStreamExhausted, "naive_estimate: stream exhausted");
  return naive_prune(pts, R);
}

double power_iteration(const BlockMatvec& B, Eigen::Index d, std::int64_t iters,
                       std::int64_t restarts, Rng& rng) {
  require(iters >= 1 && restarts >= 1, ErrorCode::kInvalidConfig,
          "power_iteration: iters and restarts must be >= 1");
  Mat V(d, restarts), out(d, restarts);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(2 * V.size()));
  rng.fill_normal(V);
  Vec lam = Vec::Zero(restarts);
  for (Eigen::Index j = 0; j < restarts; ++j) V.col(j).normalize();
  for (std::int64_t it = 0; it < iters; ++it) {
    B(V, out);
    if (!out.allFinite()) fail(ErrorCode::kNumericalFailure, "power_iteration: non-finite");
    for (Eigen::Index j = 0; j < restarts; ++j) {
      double nrm = out.col(j).norm();
      lam(j) = nrm;
      if (nrm > 0.0) V.col(j) = out.col(j) / nrm;
      else V.col(j).setZero();
    }
  }
  return median(std::vector<double>(lam.data(), lam.data() + lam.size()));
}

Sketch build_sketch(const BlockMatvec& B, Eigen::Index d, std::int64_t p, std::int64_t L,
                    Rng& rng) {
  require(p >= 1 && L >= 1, ErrorCode::kInvalidConfig, "build_sketch: p and L must be >= 1");
  Mat Z(d, L), out(d, L);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(2 * Z.size()));
  rng.fill_rademacher(Z);
  for (std::int64_t k = 0; k < p; ++k) {
    B(Z, out);
    if (!out.allFinite()) fail(ErrorCode::kNumericalFailure, "build_sketch: non-finite");
    Z.swap(out);
  }
  return Sketch(Z.transpose() / std::sqrt(static_cast<double>(L)));
}

double filter_expectation(const Vec& w, const Vec& tau, double r, std::int64_t ell) {
  KahanSum s;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) == 0.0 || tau(i) == 0.0) continue;
    double lf = log_round_factor(tau(i), r, ell);
    if (std::isinf(lf)) continue;
    s.add(w(i) * std::exp(lf) * tau(i));
  }
  return s.value() / static_cast<double>(w.size());
}

std::int64_t downweighting_filter_exact(const std::function<double(std::int64_t)>& E, double T,
                                        std::int64_t ell_max) {
  require(ell_max >= 1 && T > 0.0, ErrorCode::kInvalidInput,
          "filter: need ell_max >= 1 and T > 0");
  std::map<std::int64_t, double> cache;
  auto ev = [&](std::int64_t l) {
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    double v = E(l);
    cache.emplace(l, v);
    return v;
  };
  std::int64_t lo = 1, hi = ell_max;
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (ev(mid) <= 2.0 * T) hi = mid;
    else lo = mid + 1;
  }
  if (ev(lo) > 2.0 * T)
    fail(ErrorCode::kFilterStuck, "filter: no exponent up to ell_max meets the 2T condition");
  return lo;
}

std::int64_t downweighting_filter_exact(const Vec& w, const Vec& tau, double r, double T,
                                        std::int64_t ell_max) {
  require(w.size() == tau.size() && w.size() > 0, ErrorCode::kInvalidInput,
          "filter: weight and score lengths differ");
  return downweighting_filter_exact(
      [&](std::int64_t l) { return filter_expectation(w, tau, r, l); }, T, ell_max);
}

MomentOracle::MomentOracle(const Mat& X, const Vec& w, double shift, Eigen::Index chunk)
    : X_(X), w_(w), shift_(shift), chunk_(std::max<Eigen::Index>(1, chunk)) {
  const Eigen::Index n = X.cols(), d = X.rows();
  KahanSum ws;
  KahanMatrix acc(d, 1);
  for (Eigen::Index s = 0; s < n; s += chunk_) {
    const Eigen::Index c = std::min(chunk_, n - s);
    double part = w.segment(s, c).sum();
    ws.add(part);
    acc.add(X.middleCols(s, c) * w.segment(s, c));
  }
  wsum_ = ws.value();
  mass_ = wsum_ / static_cast<double>(n);
  require(wsum_ > 0.0, ErrorCode::kNumericalFailure, "moment oracle: zero total weight");
  mean_ = acc.value().col(0) / wsum_;
}

void MomentOracle::apply_sigma(const Mat& V, Mat& out) const {
  out = weighted_moment_apply(X_, w_, mean_, V, chunk_) / wsum_;
}

void MomentOracle::apply_B(const Mat& V, Mat& out) const {
  apply_sigma(V, out);
  out = (mass_ * mass_) * out - shift_ * V;
}

BlockMatvec MomentOracle::matvec() const {
  return [this](const Mat& in, Mat& out) { apply_B(in, out); };
}

namespace {

void score_all(const FilterRound& rd, const Mat& X, Eigen::Index chunk, Vec& tau) {
  const Eigen::Index n = X.cols();
  tau.resize(n);
  Vec g(chunk), t(chunk);
  for (Eigen::Index s = 0; s < n; s += chunk) {
    const Eigen::Index c = std::min(chunk, n - s);
    score_eval_block(rd, X.middleCols(s, c), g.head(c), t.head(c));
    tau.segment(s, c) = t.head(c);
  }
}

}  // namespace

EstimateResult robust_mean_batch(const Mat& X, const EstimatorConfig& config) {
  const Eigen::Index d = X.rows(), n = X.cols();
  require(n > 0 && d > 0, ErrorCode::kInvalidInput, "robust_mean_batch: empty dataset");
  require(X.allFinite(), ErrorCode::kInvalidInput, "robust_mean_batch: non-finite input");
  EstimateResult res;
  res.config = config.resolved(d, static_cast<std::uint64_t>(n));
  const EstimatorConfig& c = res.config;
  res.samples_used = static_cast<std::uint64_t>(n);

  Vec x0 = X.col(0);
  if (((X.colwise() - x0).cwiseAbs().maxCoeff()) == 0.0) {
    res.mu = x0;
    res.status = RunStatus::kCertified;
    res.history = FilterHistory(x0, std::numeric_limits<double>::infinity());
    return res;
  }
  if (c.eps == 0.0) {
    Vec ones = Vec::Ones(n);
    res.mu = MomentOracle(X, ones, 0.0, c.chunk).mean();
    res.status = RunStatus::kCertified;
    res.history = FilterHistory(res.mu, std::numeric_limits<double>::infinity());
    return res;
  }

  Rng rng = seeded_rng(c.seed, 1);
  const double R = c.radius_R;
  const Eigen::Index k = std::min<Eigen::Index>(n, naive_sample_count(c.tau));
  Vec mu0 = naive_prune(X.leftCols(k), R);
  FilterHistory hist(mu0, 5.0 * R);

  Vec w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = (X.col(i) - mu0).norm() <= hist.init_radius ? 1.0 : 0.0;

  const double ratio = c.delta * c.delta / c.eps;
  const double shift = 1.0 - c.C1 * ratio;
  const double stop = c.C2 * ratio;
  const Eigen::Index chunk = c.chunk;

  for (std::int64_t t = 0; t < c.K; ++t) {
    MomentOracle orc(X, w, shift, chunk);
    IterationRecord rec;
    rec.t = static_cast<int>(t);
    rec.weight_mass = orc.mass();
    rec.lambda_hat = power_iteration(orc.matvec(), d, c.power_iters, c.power_restarts, rng);
    rec.samples_used = res.samples_used;
    res.mu = orc.mean();
    res.iterations = static_cast<int>(t) + 1;
    if (rec.lambda_hat <= stop) {
      res.trace.push_back(rec);
      res.status = RunStatus::kCertified;
      res.history = std::move(hist);
      return res;
    }
    Sketch U = build_sketch(orc.matvec(), d, c.p, c.L, rng);
    rec.frob_sq = U.frob_sq();
    rec.T = c.c_T * rec.lambda_hat * U.frob_sq();
    rec.threshold = c.C3 * U.frob_sq() * rec.lambda_hat / c.eps;
    rec.r_bound = c.c_r * U.frob_sq() * (6.0 * R) * (6.0 * R);
    if (!(rec.T > 0.0) || !std::isfinite(rec.r_bound))
      fail(ErrorCode::kNumericalFailure, "robust_mean_batch: degenerate sketch");
    rec.ell_max = static_cast<std::int64_t>(std::ceil(rec.r_bound / rec.T)) + 1;
    FilterRound rd(orc.mean(), std::move(U), rec.threshold, 0, rec.r_bound);
    Vec tau;
    score_all(rd, X, chunk, tau);
    rec.exponent = downweighting_filter_exact(w, tau, rd.r_bound, rec.T, rec.ell_max);
    rd.exponent = rec.exponent;
    KahanSum removed;
    for (Eigen::Index i = 0; i < n; ++i) {
      double lf = log_round_factor(tau(i), rd.r_bound, rd.exponent);
      double nw = std::isinf(lf) ? 0.0 : w(i) * std::exp(lf);
      removed.add(w(i) - nw);
      w(i) = nw;
    }
    rec.removed_mass = removed.value() / static_cast<double>(n);
    hist.rounds.push_back(std::move(rd));
    res.trace.push_back(rec);
  }
  res.mu = MomentOracle(X, w, shift, chunk).mean();
  res.status = RunStatus::kNotCertified;
  res.history = std::move(hist);
  return res;
}

Certificate certificate_from_covariance(const Mat& cov, double delta, double eps) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()), Eigen::EigenvaluesOnly);
  Certificate out;
  out.lambda_top = es.eigenvalues().maxCoeff();
  double lam = std::max(0.0, out.lambda_top - 1.0);
  out.mean_shift_bound = delta + std::sqrt(eps * lam);
  return out;
}

Certificate certificate_check(const Mat& X, const FilterHistory& h, double delta, double eps) {
  const Eigen::Index n = X.cols(), d = X.rows();
  Vec w(n);
  const Eigen::Index chunk = 256;
  for (Eigen::Index s = 0; s < n; s += chunk) {
    const Eigen::Index c = std::min(chunk, n - s);
    weight_eval_block(h, X.middleCols(s, c), w.segment(s, c));
  }
  MomentOracle orc(X, w, 0.0, chunk);
  Mat cov;
  orc.apply_sigma(Mat::Identity(d, d), cov);
  return certificate_from_covariance(cov, delta, eps);
}

}  // namespace robustream
