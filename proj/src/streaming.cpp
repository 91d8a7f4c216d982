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

#include "robustream/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "robustream/batch_filter.hpp"
#include "robustream/error.hpp"
#include "robustream/linalg.hpp"

namespace robustream {

DrawSource::DrawSource(SampleStream& stream, std::uint64_t budget, Eigen::Index chunk,
                       Rng& rng)
    : stream_(stream),
      budget_(budget),
      chunk_(std::max<Eigen::Index>(1, chunk)),
      d_(stream.dimension()),
      rng_(rng),
      rawbuf_(d_, chunk_),
      accbuf_(d_, chunk_),
      wbuf_(chunk_),
      mem_(MemTag::kScratch, static_cast<std::size_t>(2 * d_ * chunk_ + chunk_)) {}

void DrawSource::set_history(const FilterHistory* h) {
  require(!h || h->dim() == d_, ErrorCode::kInvalidInput, "history dimension mismatch");
  hist_ = h;
  acc_pos_ = acc_len_ = 0;
}

std::uint64_t DrawSource::remaining() const {
  if (budget_ == 0) return std::numeric_limits<std::uint64_t>::max();
  return budget_ - std::min(budget_, used_);
}

void DrawSource::raw(Mat& out, Eigen::Index want) {
  require(out.rows() == d_ && out.cols() >= want, ErrorCode::kInvalidInput,
          "raw draw: buffer too small");
  for (Eigen::Index i = 0; i < want; ++i) {
    if (budget_ && used_ >= budget_)
      fail(ErrorCode::kStreamExhausted, "sample budget exhausted");
    if (!stream_.next(out.col(i).data()))
      fail(ErrorCode::kStreamExhausted, "stream exhausted");
    ++used_;
  }
}

void DrawSource::refill() {
  std::uint64_t rem = remaining();
  if (rem == 0) fail(ErrorCode::kStreamExhausted, "sample budget exhausted");
  const Eigen::Index c =
      static_cast<Eigen::Index>(std::min<std::uint64_t>(static_cast<std::uint64_t>(chunk_), rem));
  raw(rawbuf_, c);
  if (hist_) weight_eval_block(*hist_, rawbuf_.leftCols(c), wbuf_.head(c));
  else wbuf_.head(c).setOnes();
  acc_pos_ = acc_len_ = 0;
  for (Eigen::Index i = 0; i < c; ++i) {
    if (rng_.uniform() < wbuf_(i)) accbuf_.col(acc_len_++) = rawbuf_.col(i);
  }
  wraw_ += static_cast<std::uint64_t>(c);
  wacc_ += static_cast<std::uint64_t>(acc_len_);
}

void DrawSource::weighted(Mat& out, Eigen::Index count) {
  require(out.rows() == d_ && out.cols() >= count, ErrorCode::kInvalidInput,
          "weighted draw: buffer too small");
  for (Eigen::Index i = 0; i < count; ++i) {
    while (acc_pos_ == acc_len_) refill();
    out.col(i) = accbuf_.col(acc_pos_++);
  }
}

Vec rejection_sample(SampleStream& stream, const FilterHistory* h, Rng& rng) {
  Vec x(stream.dimension());
  while (true) {
    if (!stream.next(x)) fail(ErrorCode::kStreamExhausted, "rejection_sample: stream exhausted");
    double w = h ? weight_eval(*h, x) : 1.0;
    if (rng.uniform() < w) return x;
  }
}

double estimate_weight_mass(DrawSource& src, std::int64_t n) {
  require(n >= 1, ErrorCode::kInvalidInput, "weight mass: need n >= 1");
  const Eigen::Index chunk = src.chunk();
  Mat buf(src.dim(), chunk);
  Vec w(chunk);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(buf.size() + chunk));
  KahanSum s;
  for (std::int64_t done = 0; done < n;) {
    const Eigen::Index c = static_cast<Eigen::Index>(std::min<std::int64_t>(chunk, n - done));
    src.raw(buf, c);
    if (src.history()) weight_eval_block(*src.history(), buf.leftCols(c), w.head(c));
    else w.head(c).setOnes();
    s.add(w.head(c).sum());
    done += c;
  }
  return s.value() / static_cast<double>(n);
}

void fresh_chain(DrawSource& src, Mat& V, std::int64_t p, std::int64_t pairs, double W,
                 double shift) {
  require(p >= 1 && pairs >= 1, ErrorCode::kInvalidInput, "fresh_chain: need p, pairs >= 1");
  require(V.rows() == src.dim(), ErrorCode::kInvalidInput, "fresh_chain: dimension mismatch");
  const Eigen::Index d = V.rows(), m = V.cols();
  const Eigen::Index cp = std::max<Eigen::Index>(1, src.chunk() / 2);
  Mat P(d, 2 * cp), Y(d, cp), A(cp, m);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(P.size() + Y.size() + A.size()));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::int64_t k = 0; k < p; ++k) {
    KahanMatrix acc(d, m);
    for (std::int64_t done = 0; done < pairs;) {
      const Eigen::Index c = static_cast<Eigen::Index>(std::min<std::int64_t>(cp, pairs - done));
      src.weighted(P, 2 * c);
      for (Eigen::Index i = 0; i < c; ++i)
        Y.col(i) = (P.col(2 * i) - P.col(2 * i + 1)) * inv_sqrt2;
      A.topRows(c).noalias() = Y.leftCols(c).transpose() * V;
      acc.add(Y.leftCols(c) * A.topRows(c));
      done += c;
    }
    V = (W * W / static_cast<double>(pairs)) * acc.value() - shift * V;
    if (!V.allFinite()) fail(ErrorCode::kNumericalFailure, "fresh_chain: non-finite");
  }
}

namespace {

double shift_of(const EstimatorConfig& c) {
  return c.eps > 0.0 ? 1.0 - c.C1 * c.delta * c.delta / c.eps : 1.0;
}

}  // namespace

Vec fresh_batch_matvec(SampleStream& stream, const FilterHistory& h,
                       const EstimatorConfig& resolved, const Vec& z, Rng& rng) {
  require(resolved.batch_n >= 1, ErrorCode::kInvalidConfig, "fresh_batch_matvec: batch_n unset");
  require(z.size() == stream.dimension(), ErrorCode::kInvalidInput,
          "fresh_batch_matvec: dimension mismatch");
  DrawSource src(stream, 0, resolved.chunk, rng);
  src.set_history(&h);
  double W = estimate_weight_mass(src, resolved.batch_n);
  Mat V = z;
  fresh_chain(src, V, resolved.p, resolved.batch_n, W, shift_of(resolved));
  return V.col(0);
}

double lambda_hat_power(const std::function<void(Mat&)>& apply_M, Eigen::Index d,
                        std::int64_t p, std::int64_t repeats, Rng& rng) {
  require(p >= 1 && repeats >= 1, ErrorCode::kInvalidInput, "lambda_hat: p, repeats >= 1");
  Mat G(d, repeats);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(G.size()));
  rng.fill_normal(G);
  apply_M(G);
  std::vector<double> vals(static_cast<std::size_t>(repeats));
  for (Eigen::Index j = 0; j < repeats; ++j)
    vals[static_cast<std::size_t>(j)] = std::pow(G.col(j).norm(), 1.0 / static_cast<double>(p));
  return median(std::move(vals));
}

double lambda_hat_streaming(SampleStream& stream, const FilterHistory& h,
                            const EstimatorConfig& resolved, Rng& rng) {
  require(resolved.batch_n >= 1, ErrorCode::kInvalidConfig, "lambda_hat_streaming: batch_n unset");
  DrawSource src(stream, 0, resolved.chunk, rng);
  src.set_history(&h);
  double W = estimate_weight_mass(src, resolved.batch_n);
  return lambda_hat_power(
      [&](Mat& V) { fresh_chain(src, V, resolved.p, resolved.batch_n, W, shift_of(resolved)); },
      stream.dimension(), resolved.p, resolved.lambda_repeats, rng);
}

double stopping_estimator(DrawSource& src, const FilterRound& draft, std::int64_t ell,
                          std::int64_t n, int groups) {
  require(n >= 1 && groups >= 1, ErrorCode::kInvalidInput, "stopping_estimator: n, groups >= 1");
  const std::int64_t G = std::min<std::int64_t>(groups, n);
  const Eigen::Index chunk = src.chunk();
  Mat buf(src.dim(), chunk);
  Vec w(chunk), g(chunk), tau(chunk);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(buf.size() + 3 * chunk + 2 * G));
  std::vector<KahanSum> sums(static_cast<std::size_t>(G));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(G), 0);
  std::int64_t j = 0;
  while (j < n) {
    const Eigen::Index c = static_cast<Eigen::Index>(std::min<std::int64_t>(chunk, n - j));
    src.raw(buf, c);
    if (src.history()) weight_eval_block(*src.history(), buf.leftCols(c), w.head(c));
    else w.head(c).setOnes();
    score_eval_block(draft, buf.leftCols(c), g.head(c), tau.head(c));
    for (Eigen::Index i = 0; i < c; ++i, ++j) {
      const std::size_t grp = static_cast<std::size_t>(j * G / n);
      double v = 0.0;
      if (w(i) > 0.0 && tau(i) > 0.0) {
        double lf = log_round_factor(tau(i), draft.r_bound, ell);
        if (!std::isinf(lf)) v = w(i) * std::exp(lf) * tau(i);
      }
      sums[grp].add(v);
      ++counts[grp];
    }
  }
  std::vector<double> means(static_cast<std::size_t>(G));
  for (std::size_t k = 0; k < means.size(); ++k)
    means[k] = sums[k].value() / static_cast<double>(counts[k]);
  return median(std::move(means));
}

double stopping_estimator(SampleStream& stream, const FilterHistory& h,
                          const FilterRound& draft, std::int64_t ell, std::int64_t n,
                          int groups, Rng& rng) {
  DrawSource src(stream, 0, 256, rng);
  src.set_history(&h);
  return stopping_estimator(src, draft, ell, n, groups);
}

std::int64_t downweighting_filter_approx(const std::function<double(std::int64_t)>& f,
                                         double T, std::int64_t ell_max) {
  require(ell_max >= 1 && T > 0.0, ErrorCode::kInvalidInput,
          "approx filter: need ell_max >= 1 and T > 0");
  std::map<std::int64_t, double> cache;
  auto ev = [&](std::int64_t l) {
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    double v = f(l);
    cache.emplace(l, v);
    return v;
  };
  std::int64_t lo = 1, hi = ell_max;
  while (hi - lo + 1 > 2) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (ev(mid) > 9.0 * T) lo = mid;
    else hi = mid;
  }
  for (std::int64_t l : {lo, hi}) {
    double v = ev(l);
    if (v >= 4.0 * T && v <= 36.0 * T) return l;
  }
  if (lo == 1 && ev(1) < 4.0 * T) return 1;
  fail(ErrorCode::kFilterStuck, "approx filter: no candidate inside [4T, 36T]");
}

double streaming_trace_bound(Eigen::Index d, double eps, double delta, double R) {
  const double dd = static_cast<double>(d);
  if (eps <= 0.0) return dd;
  return dd * (1.0 + delta * delta / eps) + eps * R * R;
}

Vec mean_estimate_heavy(DrawSource& src, double delta, double trace_bound, int groups,
                        std::uint64_t cap) {
  require(delta > 0.0 && trace_bound > 0.0 && groups >= 1, ErrorCode::kInvalidInput,
          "mean_estimate_heavy: need delta, trace bound > 0 and groups >= 1");
  const Eigen::Index d = src.dim();
  double m_real = std::ceil(20.0 * trace_bound / (delta * delta));
  const double G = static_cast<double>(groups);
  if (cap > 0 && m_real * G > static_cast<double>(cap))
    m_real = std::max(1.0, std::floor(static_cast<double>(cap) / G));
  const std::int64_t m = static_cast<std::int64_t>(m_real);
  const double radius = std::max(delta, std::sqrt(20.0 * trace_bound / m_real));
  const Eigen::Index chunk = src.chunk();
  Mat means(d, groups), buf(d, chunk);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(means.size() + buf.size()));
  for (int g = 0; g < groups; ++g) {
    KahanMatrix acc(d, 1);
    for (std::int64_t done = 0; done < m;) {
      const Eigen::Index c = static_cast<Eigen::Index>(std::min<std::int64_t>(chunk, m - done));
      src.weighted(buf, c);
      acc.add(buf.leftCols(c).rowwise().sum());
      done += c;
    }
    means.col(g) = acc.value().col(0) / m_real;
  }
  return naive_prune(means, radius);
}

Vec mean_estimate_heavy(SampleStream& stream, const FilterHistory* h, double delta, double tau,
                        double trace_bound, std::uint64_t cap, Rng& rng) {
  require(tau > 0.0 && tau < 1.0, ErrorCode::kInvalidInput, "tau must lie in (0, 1)");
  DrawSource src(stream, 0, 256, rng);
  src.set_history(h);
  const int groups = 2 * static_cast<int>(std::ceil(std::log(1.0 / tau))) + 1;
  return mean_estimate_heavy(src, delta, trace_bound, groups, cap);
}

namespace {

struct Quotas {
  std::int64_t weight, lambda, fresh, stopping, mean;
};

Quotas make_quotas(const EstimatorConfig& c, std::int64_t naive_k) {
  const double N = static_cast<double>(c.budget);
  const double P = static_cast<double>(c.planned_iters);
  Quotas q;
  q.weight = std::max<std::int64_t>(
      64, static_cast<std::int64_t>((c.share_naive_weight * N - static_cast<double>(naive_k)) / P));
  q.lambda = static_cast<std::int64_t>(c.share_lambda * N / P);
  q.fresh = static_cast<std::int64_t>(c.share_fresh * N / P);
  q.stopping = static_cast<std::int64_t>(c.share_stopping * N / P);
  q.mean = static_cast<std::int64_t>(c.share_mean * N / P);
  return q;
}

std::int64_t pairs_for(const EstimatorConfig& c, std::int64_t raw_quota, double W,
                       std::int64_t divisor) {
  if (c.batch_n > 0) return c.batch_n;
  double v = std::floor(static_cast<double>(raw_quota) * W / static_cast<double>(2 * divisor));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(v));
}

// Detaches the returned history from the run's ledger.
EstimateResult detach(EstimateResult res) {
  FilterHistory copy = res.history;
  res.history = std::move(copy);
  return res;
}

EstimateResult streaming_impl(SampleStream& stream, const EstimatorConfig& config) {
  const Eigen::Index d = stream.dimension();
  require(config.budget > 0, ErrorCode::kInvalidConfig, "streaming estimator needs budget > 0");
  EstimateResult res;
  res.config = config.resolved(d, config.budget);
  const EstimatorConfig& c = res.config;
  Rng rng = seeded_rng(c.seed, 2);
  DrawSource src(stream, c.budget, c.chunk, rng);

  if (c.eps == 0.0) {
    try {
      res.mu = mean_estimate_heavy(src, c.delta, streaming_trace_bound(d, 0.0, c.delta, 0.0),
                                   c.mean_groups, c.budget);
      res.status = RunStatus::kCertified;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kStreamExhausted) throw;
      fail(ErrorCode::kStreamExhausted, "stream ended before the mean estimate finished");
    }
    res.samples_used = src.used();
    res.history = FilterHistory(res.mu, std::numeric_limits<double>::infinity());
    return res;
  }

  const std::int64_t k = naive_sample_count(c.tau);
  if (static_cast<std::uint64_t>(k) >= c.budget)
    fail(ErrorCode::kInvalidConfig, "budget smaller than the naive-estimate sample");
  Vec mu0;
  {
    Mat pts(d, k);
    MemToken mem(MemTag::kScratch, static_cast<std::size_t>(pts.size()));
    src.raw(pts, k);
    mu0 = naive_prune(pts, c.radius_R);
  }
  FilterHistory hist(mu0, 5.0 * c.radius_R);
  src.set_history(&hist);

  const double ratio = c.delta * c.delta / c.eps;
  const double shift = 1.0 - c.C1 * ratio;
  const double stop = c.C2 * ratio;
  const double tr = streaming_trace_bound(d, c.eps, c.delta, c.radius_R);
  const Quotas q = make_quotas(c, k);
  Vec mu_last = mu0;
  res.status = RunStatus::kNotCertified;

  try {
    for (std::int64_t t = 0; t < c.K; ++t) {
      IterationRecord rec;
      rec.t = static_cast<int>(t);
      res.iterations = static_cast<int>(t) + 1;
      const double W = estimate_weight_mass(src, q.weight);
      rec.weight_mass = W;
      if (!(W > 0.0)) fail(ErrorCode::kNumericalFailure, "all weight mass filtered out");
      if (!res.trace.empty()) res.trace.back().removed_mass = res.trace.back().weight_mass - W;

      const std::uint64_t mean_cap = std::max<std::uint64_t>(
          static_cast<std::uint64_t>(c.mean_groups),
          static_cast<std::uint64_t>(static_cast<double>(q.mean) * W));
      Vec mu_t = mean_estimate_heavy(src, c.delta, tr, c.mean_groups, mean_cap);
      mu_last = mu_t;

      const std::int64_t pairs_l = pairs_for(c, q.lambda, W, c.p);
      rec.lambda_hat = lambda_hat_power(
          [&](Mat& V) { fresh_chain(src, V, c.p, pairs_l, W, shift); }, d, c.p,
          c.lambda_repeats, rng);

      if (rec.lambda_hat <= stop) {
        res.status = RunStatus::kCertified;
        const std::uint64_t rem = src.remaining();
        const std::uint64_t cap = static_cast<std::uint64_t>(0.8 * static_cast<double>(rem) * W);
        if (cap > mean_cap) {
          try {
            mu_last = mean_estimate_heavy(src, c.delta, tr, c.mean_groups, cap);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kStreamExhausted) throw;
          }
        }
        rec.samples_used = src.used();
        res.trace.push_back(rec);
        break;
      }

      const std::int64_t L = c.L;
      Mat Z(d, L);
      {
        MemToken mem(MemTag::kScratch, static_cast<std::size_t>(Z.size()));
        rng.fill_rademacher(Z);
        if (!c.fresh_per_row) {
          fresh_chain(src, Z, c.p, pairs_for(c, q.fresh, W, c.p), W, shift);
        } else {
          const std::int64_t pr = pairs_for(c, q.fresh, W, c.p * L);
          Mat col(d, 1);
          for (Eigen::Index j = 0; j < L; ++j) {
            col = Z.col(j);
            fresh_chain(src, col, c.p, pr, W, shift);
            Z.col(j) = col.col(0);
          }
        }
      }
      Sketch U(Z.transpose() / std::sqrt(static_cast<double>(L)));
      Z.resize(0, 0);
      rec.frob_sq = U.frob_sq();
      rec.T = c.c_T * rec.lambda_hat * U.frob_sq();
      rec.threshold = c.C3 * U.frob_sq() * rec.lambda_hat / c.eps;
      rec.r_bound = c.c_r * U.frob_sq() * (6.0 * c.radius_R) * (6.0 * c.radius_R);
      if (!(rec.T > 0.0) || !std::isfinite(rec.r_bound))
        fail(ErrorCode::kNumericalFailure, "degenerate sketch");
      rec.ell_max = static_cast<std::int64_t>(std::ceil(rec.r_bound / rec.T)) + 1;
      FilterRound draft(mu_t, std::move(U), rec.threshold, 0, rec.r_bound);

      const std::int64_t steps = ceil_log2(static_cast<double>(rec.ell_max)) + 2;
      const std::int64_t n_f = std::max<std::int64_t>(c.stop_groups, q.stopping / steps);
      std::map<std::int64_t, double> fcache;
      auto f = [&](std::int64_t l) {
        auto it = fcache.find(l);
        if (it != fcache.end()) return it->second;
        double v = stopping_estimator(src, draft, l, n_f, c.stop_groups);
        fcache.emplace(l, v);
        return v;
      };
      try {
        rec.exponent = downweighting_filter_approx(f, rec.T, rec.ell_max);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kFilterStuck) throw;
        // Take the smallest evaluated exponent whose estimate already sits
        // below the window.
        rec.filter_fallback = true;
        rec.exponent = fcache.rbegin()->first;
        for (const auto& [l, v] : fcache)
          if (v < 4.0 * rec.T) {
            rec.exponent = l;
            break;
          }
      }
      draft.exponent = rec.exponent;
      hist.rounds.push_back(std::move(draft));
      src.set_history(&hist);
      rec.samples_used = src.used();
      res.trace.push_back(rec);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kStreamExhausted) throw;
    res.status = RunStatus::kBudgetExhausted;
  }
  res.mu = mu_last;
  res.samples_used = src.used();
  res.history = std::move(hist);
  return res;
}

template <class F>
void for_each_chunk(SampleStream& s, Eigen::Index chunk, F&& fn) {
  Mat buf(s.dimension(), chunk);
  MemToken mem(MemTag::kScratch, static_cast<std::size_t>(buf.size()));
  Eigen::Index pos = 0;
  std::uint64_t offset = 0;
  while (true) {
    pos = 0;
    while (pos < chunk && s.next(buf.col(pos))) ++pos;
    if (pos == 0) break;
    fn(offset, buf.leftCols(pos));
    offset += static_cast<std::uint64_t>(pos);
    if (pos < chunk) break;
  }
}

EstimateResult multipass_impl(ReiterableSource& source, const EstimatorConfig& config) {
  const Eigen::Index d = source.dimension();
  const std::uint64_t n = source.size();
  require(n > 0, ErrorCode::kInvalidInput, "multipass: empty dataset");
  EstimateResult res;
  res.config = config.resolved(d, n);
  const EstimatorConfig& c = res.config;
  const Eigen::Index chunk = c.chunk;
  res.samples_used = n;
  Rng rng = seeded_rng(c.seed, 3);
  const double nd = static_cast<double>(n);

  auto mass_and_mean = [&](const FilterHistory* h, double& wsum) {
    KahanSum ws;
    KahanMatrix acc(d, 1);
    Vec w(chunk);
    auto s = source.open_pass();
    for_each_chunk(*s, chunk, [&](std::uint64_t, const Eigen::Ref<const Mat>& X) {
      auto wc = w.head(X.cols());
      if (h) weight_eval_block(*h, X, wc);
      else wc.setOnes();
      ws.add(wc.sum());
      acc.add(X * wc);
    });
    wsum = ws.value();
    require(wsum > 0.0, ErrorCode::kNumericalFailure, "multipass: zero total weight");
    return Vec(acc.value().col(0) / wsum);
  };

  if (c.eps == 0.0) {
    double ws = 0.0;
    res.mu = mass_and_mean(nullptr, ws);
    res.status = RunStatus::kCertified;
    res.passes = source.passes();
    res.history = FilterHistory(res.mu, std::numeric_limits<double>::infinity());
    return res;
  }

  const std::int64_t k = std::min<std::int64_t>(static_cast<std::int64_t>(n),
                                                naive_sample_count(c.tau));
  Vec mu0;
  {
    Mat pts(d, k);
    MemToken mem(MemTag::kScratch, static_cast<std::size_t>(pts.size()));
    auto s = source.open_pass();
    for (std::int64_t i = 0; i < k; ++i) s->next(pts.col(i));
    mu0 = naive_prune(pts, c.radius_R);
  }
  FilterHistory hist(mu0, 5.0 * c.radius_R);
  const double ratio = c.delta * c.delta / c.eps;
  const double shift = 1.0 - c.C1 * ratio;
  const double stop = c.C2 * ratio;
  const std::int64_t reps = c.lambda_repeats, L = c.L, p = c.p;
  res.status = RunStatus::kNotCertified;

  for (std::int64_t t = 0; t < c.K; ++t) {
    IterationRecord rec;
    rec.t = static_cast<int>(t);
    res.iterations = static_cast<int>(t) + 1;
    double wsum = 0.0;
    Vec mu_t = mass_and_mean(&hist, wsum);
    const double W = wsum / nd;
    rec.weight_mass = W;
    if (!res.trace.empty()) res.trace.back().removed_mass = res.trace.back().weight_mass - W;
    res.mu = mu_t;

    // One pass: factor k of both chains uses the k-th contiguous segment.
    Mat V(d, reps + L);
    MemToken vmem(MemTag::kScratch, static_cast<std::size_t>(V.size()));
    rng.fill_normal(V.leftCols(reps));
    rng.fill_rademacher(V.rightCols(L));
    {
      KahanMatrix acc(d, V.cols());
      KahanSum wseg;
      std::int64_t factor = 0;
      Vec w(chunk);
      Mat Y, A;
      MemToken mem(MemTag::kScratch,
                   static_cast<std::size_t>(chunk * (d + V.cols())));
      auto close_segment = [&]() {
        double ws = wseg.value();
        if (!(ws > 0.0)) fail(ErrorCode::kNumericalFailure, "multipass: empty segment");
        V = (W * W / ws) * acc.value() - shift * V;
        if (!V.allFinite()) fail(ErrorCode::kNumericalFailure, "multipass: non-finite chain");
        acc.reset();
        wseg = KahanSum();
        ++factor;
      };
      auto seg_end = [&](std::int64_t f) {
        return static_cast<std::uint64_t>(f + 1) * n / static_cast<std::uint64_t>(p);
      };
      auto s = source.open_pass();
      for_each_chunk(*s, chunk, [&](std::uint64_t off, const Eigen::Ref<const Mat>& X) {
        Eigen::Index i = 0;
        while (i < X.cols()) {
          const std::uint64_t end = seg_end(factor);
          const Eigen::Index c2 = static_cast<Eigen::Index>(
              std::min<std::uint64_t>(static_cast<std::uint64_t>(X.cols() - i),
                                      end - (off + static_cast<std::uint64_t>(i))));
          if (c2 > 0) {
            auto Xs = X.middleCols(i, c2);
            auto wc = w.head(c2);
            weight_eval_block(hist, Xs, wc);
            Y = Xs.colwise() - mu_t;
            A.noalias() = Y.transpose() * V;
            A = wc.asDiagonal() * A;
            acc.add(Y * A);
            wseg.add(wc.sum());
            i += c2;
          }
          if (off + static_cast<std::uint64_t>(i) >= end && factor < p) close_segment();
        }
      });
      while (factor < p) close_segment();
    }
    std::vector<double> lam(static_cast<std::size_t>(reps));
    for (Eigen::Index j = 0; j < reps; ++j)
      lam[static_cast<std::size_t>(j)] = std::pow(V.col(j).norm(), 1.0 / static_cast<double>(p));
    rec.lambda_hat = median(lam);
    rec.passes = source.passes();
    if (rec.lambda_hat <= stop) {
      res.status = RunStatus::kCertified;
      res.trace.push_back(rec);
      break;
    }
    Sketch U(Mat(V.rightCols(L).transpose() / std::sqrt(static_cast<double>(L))));
    V.resize(0, 0);
    rec.frob_sq = U.frob_sq();
    rec.T = c.c_T * rec.lambda_hat * U.frob_sq();
    rec.threshold = c.C3 * U.frob_sq() * rec.lambda_hat / c.eps;
    rec.r_bound = c.c_r * U.frob_sq() * (6.0 * c.radius_R) * (6.0 * c.radius_R);
    if (!(rec.T > 0.0) || !std::isfinite(rec.r_bound))
      fail(ErrorCode::kNumericalFailure, "multipass: degenerate sketch");
    rec.ell_max = static_cast<std::int64_t>(std::ceil(rec.r_bound / rec.T)) + 1;
    FilterRound draft(mu_t, std::move(U), rec.threshold, 0, rec.r_bound);
    auto E = [&](std::int64_t ell) {
      KahanSum s;
      Vec w(chunk), g(chunk), tau(chunk);
      auto ps = source.open_pass();
      for_each_chunk(*ps, chunk, [&](std::uint64_t, const Eigen::Ref<const Mat>& X) {
        const Eigen::Index cc = X.cols();
        weight_eval_block(hist, X, w.head(cc));
        score_eval_block(draft, X, g.head(cc), tau.head(cc));
        for (Eigen::Index i = 0; i < cc; ++i) {
          if (w(i) == 0.0 || tau(i) == 0.0) continue;
          double lf = log_round_factor(tau(i), draft.r_bound, ell);
          if (!std::isinf(lf)) s.add(w(i) * std::exp(lf) * tau(i));
        }
      });
      return s.value() / nd;
    };
    rec.exponent = downweighting_filter_exact(E, rec.T, rec.ell_max);
    draft.exponent = rec.exponent;
    hist.rounds.push_back(std::move(draft));
    rec.passes = source.passes();
    res.trace.push_back(rec);
  }
  res.passes = source.passes();
  res.history = std::move(hist);
  return res;
}

}  // namespace

EstimateResult robust_mean_streaming(SampleStream& stream, const EstimatorConfig& config,
                                     MemoryLedger* ledger) {
  EstimateResult res;
  {
    LedgerScope scope(ledger ? ledger : active_ledger());
    res = streaming_impl(stream, config);
  }
  return detach(std::move(res));
}

EstimateResult robust_mean_multipass(ReiterableSource& source, const EstimatorConfig& config,
                                     MemoryLedger* ledger) {
  EstimateResult res;
  {
    LedgerScope scope(ledger ? ledger : active_ledger());
    res = multipass_impl(source, config);
  }
  return detach(std::move(res));
}

}  // namespace robustream
