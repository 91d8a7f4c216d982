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

// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robustream/applications.hpp"
#include "robustream/batch_filter.hpp"
#include "robustream/error.hpp"
#include "robustream/harness.hpp"
#include "robustream/lab.hpp"
#include "robustream/ledger.hpp"
#include "robustream/streaming.hpp"

namespace rs = robustream;
using rs::Mat;
using rs::Vec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) { return oracle::median(v); }

std::string mean_shift_json(int d, std::uint64_t n, std::uint64_t seed) {
  std::ostringstream os;
  os << R"({"d": )" << d << R"(, "n": )" << n << R"(, "seed": )" << seed
     << R"(, "inlier": {"kind": "gaussian"},
       "adversary": {"kind": "mean_shift_cluster", "eps": 0.1, "magnitude_sqrt_d": 2.0}})";
  return os.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t memory_bound(const rs::EstimatorConfig& k, std::int64_t d) {
  return static_cast<std::size_t>((k.K * (k.L + 2) + k.L + 8) * d);
}

struct Verdict {
  bool pass = true;
  std::string detail;
  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += " [failed: " + what + "]";
    }
  }
};

void print(int id, const Verdict& v) {
  std::printf("criterion %2d: %s%s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Audit bookkeeping shared by criterion 6.
struct AuditTally {
  int rounds = 0;
  int unfair = 0;
  double min_mass = 1.0;
  void add(const std::vector<rs::RoundAudit>& audit) {
    for (const auto& a : audit) {
      ++rounds;
      if (!(a.inlier_removed < a.outlier_removed + 3 * a.sigma)) ++unfair;
      min_mass = std::min(min_mass, a.inlier_mass_after);
    }
  }
};

AuditTally g_audit;

struct StreamRun {
  rs::EstimateResult res;
  std::uint64_t consumed = 0;
  bool consecutive = false;
  std::uint64_t max_serial = 0;
  std::size_t peak = 0;
  double secs = 0.0;
};

StreamRun run_streaming(int d, std::uint64_t budget, std::uint64_t seed) {
  auto sc = rs::scenario_from_json(mean_shift_json(d, budget, seed));
  auto lab = rs::open_scenario(sc);
  rs::UnlabeledView view(*lab);
  rs::EstimatorConfig c;
  c.eps = 0.1;
  c.seed = seed;
  c.budget = budget;
  rs::MemoryLedger led;
  StreamRun out;
  auto t0 = Clock::now();
  out.res = rs::robust_mean_streaming(view, c, &led);
  out.secs = seconds_since(t0);
  out.consumed = view.consumed();
  out.consecutive = view.serials_consecutive();
  out.max_serial = view.max_serial_seen();
  out.peak = led.peak();
  return out;
}

// Sample mean of the first `count` points of the scenario stream.
Vec corrupted_mean(int d, std::uint64_t n, std::uint64_t seed, std::uint64_t count) {
  auto lab = rs::open_scenario(rs::scenario_from_json(mean_shift_json(d, n, seed)));
  Vec x(d), acc = Vec::Zero(d);
  bool inl = false;
  std::uint64_t k = 0;
  while (k < count && lab->next(x.data(), &inl)) {
    acc += x;
    ++k;
  }
  return acc / static_cast<double>(std::max<std::uint64_t>(k, 1));
}

std::vector<StreamRun> g_stream_runs;

Verdict criterion1() {
  const int d = 32;
  const std::uint64_t budget = 500000;
  std::vector<double> err, base;
  double worst_secs = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    StreamRun r = run_streaming(d, budget, seed);
    err.push_back(r.res.mu.norm());
    base.push_back(corrupted_mean(d, budget, seed, r.consumed).norm());
    worst_secs = std::max(worst_secs, r.secs);
    auto sc = rs::scenario_from_json(mean_shift_json(d, budget, seed));
    auto fresh = rs::drain(*rs::open_scenario(sc, 101), 100000);
    g_audit.add(rs::audit_rounds(fresh, r.res.history));
    g_stream_runs.push_back(std::move(r));
  }
  const double me = median(err), mb = median(base);
  Verdict v;
  v.detail = fmt(" median_err=%.4f", me) + fmt(" median_sample_mean_err=%.4f", mb) +
             fmt(" max_seconds=%.2f", worst_secs);
  v.need(me <= 0.8, "median error <= 0.8");
  v.need(me <= 0.25 * mb, "median error <= 1/4 corrupted mean error");
  v.need(worst_secs <= 60.0, "runtime <= 60 s per seed");
  return v;
}

Verdict criterion2() {
  const int d = 64;
  const std::uint64_t n = 20000;
  std::vector<double> err;
  int over = 0, max_it = 0;
  std::int64_t max_k = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto data = rs::generate(rs::scenario_from_json(mean_shift_json(d, n, seed)));
    rs::EstimatorConfig c;
    c.eps = 0.1;
    c.seed = seed;
    auto res = rs::robust_mean_batch(data.X, c);
    err.push_back(res.mu.norm());
    const double R = res.config.radius_R;
    const auto K = static_cast<std::int64_t>(2 * std::ceil(std::log2(double(d))) *
                                             std::ceil(std::log2(d * R / 0.1)));
    if (res.iterations > K) ++over;
    max_it = std::max(max_it, res.iterations);
    max_k = std::max(max_k, K);
    g_audit.add(rs::audit_rounds(data, res.history));
  }
  const double me = median(err);
  Verdict v;
  v.detail = fmt(" median_err=%.4f", me) + fmt(" max_iters=%.0f", max_it) +
             fmt(" K=%.0f", static_cast<double>(max_k));
  v.need(me <= 0.8, "median error <= 0.8");
  v.need(over == 0, "iterations <= K on every seed");
  return v;
}

Verdict criterion3() {
  const int d = 32;
  Verdict v;
  std::size_t worst = 0, bound = 0;
  int over = 0;
  for (const auto& r : g_stream_runs) {
    const std::size_t b = memory_bound(r.res.config, d);
    if (r.peak > b) ++over;
    if (r.peak >= worst) {
      worst = r.peak;
      bound = b;
    }
  }
  v.need(!g_stream_runs.empty() && over == 0, "peak <= (K(L+2)+L+8)d on every seed");
  // Peak state across a 16x range of budgets may only grow with the
  // logarithmic K and L factors of the bound.
  StreamRun small = run_streaming(d, 125000, 1);
  StreamRun large = run_streaming(d, 2000000, 1);
  const double peak_ratio = double(large.peak) / double(small.peak);
  const double bound_ratio =
      double(memory_bound(large.res.config, d)) / double(memory_bound(small.res.config, d));
  v.detail = fmt(" max_peak_floats=%.0f", double(worst)) + fmt(" bound=%.0f", double(bound)) +
             fmt(" peak_ratio_16x_n=%.3f", peak_ratio) + fmt(" bound_ratio=%.3f", bound_ratio);
  v.need(large.peak <= memory_bound(large.res.config, d), "peak bound at n = 2e6");
  v.need(peak_ratio <= bound_ratio, "state does not grow with n");
  return v;
}

Verdict criterion4() {
  Verdict v;
  int bad = 0;
  for (const auto& r : g_stream_runs) {
    const bool ok = r.consecutive && r.consumed <= r.res.config.budget &&
                    r.res.samples_used == r.consumed &&
                    (r.consumed == 0 || r.max_serial + 1 == r.consumed);
    if (!ok) ++bad;
  }
  v.need(!g_stream_runs.empty() && bad == 0, "each stream point read at most once");
  int over = 0;
  std::uint64_t max_passes = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto data = rs::generate(rs::scenario_from_json(mean_shift_json(32, 20000, seed)));
    rs::MatrixSource src(data.X);
    rs::EstimatorConfig c;
    c.eps = 0.1;
    c.seed = seed;
    auto res = rs::robust_mean_multipass(src, c);
    std::int64_t ell_max = 1;
    for (const auto& rec : res.trace) ell_max = std::max(ell_max, rec.ell_max);
    const auto lg = static_cast<std::int64_t>(std::ceil(std::log2(double(ell_max))));
    const std::uint64_t passes = src.passes();
    if (passes != res.passes || static_cast<std::int64_t>(passes) > res.config.K * (2 + lg))
      ++over;
    max_passes = std::max(max_passes, passes);
  }
  v.detail = fmt(" one_pass_runs=%.0f", double(g_stream_runs.size())) +
             fmt(" max_multipass_passes=%.0f", double(max_passes));
  v.need(over == 0, "multipass passes <= K(2+ceil(log2 ell_max))");
  return v;
}

Verdict criterion5() {
  std::mt19937_64 g(2026);
  std::uniform_real_distribution<double> u(0, 1);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(u(g) * 100) % 100;
    Vec w(n), tau(n);
    for (int i = 0; i < n; ++i) {
      w[i] = u(g);
      tau[i] = u(g) < 0.3 ? 0.0 : 5.0 * u(g);
    }
    const double r = 5.0, T = 0.005 + 0.2 * u(g);
    const auto ell_max = static_cast<std::int64_t>(1 + u(g) * 9999);
    const std::int64_t ref = oracle::scan_filter(w, tau, r, T, ell_max);
    std::int64_t got = -1;
    try {
      got = rs::downweighting_filter_exact(w, tau, r, T, ell_max);
    } catch (const rs::Error& e) {
      if (e.code() != rs::ErrorCode::kFilterStuck) got = -2;
    }
    if (got != ref) ++mismatches;
  }
  int approx_ok = 0, approx_n = 0;
  while (approx_n < 200) {
    const int n = 50;
    Vec w(n), tau(n);
    for (int i = 0; i < n; ++i) {
      w[i] = 0.5 + 0.5 * u(g);
      tau[i] = u(g) < 0.5 ? 0.0 : 10.0 * u(g);
    }
    const double r = 10.0, T = 0.002 + 0.02 * u(g);
    auto E = [&](std::int64_t l) { return oracle::sum_wtau(w, tau, r, l); };
    if (E(1) <= 54 * T) continue;
    const auto ell_max = static_cast<std::int64_t>(std::ceil(r / T)) + 1;
    const std::int64_t l = rs::downweighting_filter_approx(E, T, ell_max);
    const double e = E(l);
    if (e > 2 * T && e < 54 * T) ++approx_ok;
    ++approx_n;
  }
  Verdict v;
  v.detail = fmt(" exact_mismatches=%.0f/200", mismatches) +
             fmt(" approx_in_window=%.0f/200", approx_ok);
  v.need(mismatches == 0, "exact filter equals linear scan");
  v.need(approx_ok == 200, "approximate filter lands in (2T, 54T)");
  return v;
}

Verdict criterion6() {
  Verdict v;
  v.detail = fmt(" rounds=%.0f", g_audit.rounds) + fmt(" unfair=%.0f", g_audit.unfair) +
             fmt(" min_inlier_mass=%.4f", g_audit.min_mass);
  v.need(g_audit.rounds > 0, "some filter rounds audited");
  v.need(g_audit.unfair == 0, "outlier removal exceeds inlier removal up to 3 sigma");
  v.need(g_audit.min_mass >= 1 - 3 * 0.1 - 0.02, "inlier mass >= 1 - 3 eps - 0.02");
  return v;
}

Verdict criterion7() {
  const int d = 16, n = 2000;
  int good = 0;
  double worst = 0.0;
  std::int64_t L = 0;
  for (int seed = 0; seed < 100; ++seed) {
    auto data = rs::generate(rs::scenario_from_json(mean_shift_json(d, n, seed)));
    rs::EstimatorConfig c;
    c.eps = 0.1;
    c.seed = seed;
    const auto cfg = c.resolved(d, n);
    L = cfg.L;
    const double shift = 1 - cfg.C1 * cfg.delta * cfg.delta / cfg.eps;
    Vec w = Vec::Ones(n);
    rs::MomentOracle orc(data.X, w, shift, 256);
    Mat M = oracle::mat_power(oracle::weighted_cov(data.X, w) - shift * Mat::Identity(d, d), cfg.p);
    auto rng = rs::seeded_rng(seed, 2);
    auto S = rs::build_sketch(orc.matvec(), d, cfg.p, cfg.L, rng);
    const Vec center = oracle::weighted_mean(data.X, w);
    bool all = true;
    for (int i = 0; i < n; ++i) {
      Vec y = data.X.col(i) - center;
      const double q = (S.rows() * y).squaredNorm() / (M * y).squaredNorm();
      worst = std::max(worst, std::abs(q - 1));
      all = all && q >= 0.8 && q <= 1.2;
    }
    good += all ? 1 : 0;
  }
  Verdict v;
  v.detail = fmt(" seeds_all_within=%.0f/100", good) + fmt(" worst_dev=%.3f", worst) +
             fmt(" L=%.0f", double(L));
  v.need(good >= 95, "ratio in [0.8, 1.2] on all points for >= 95 of 100 seeds");
  return v;
}

Verdict criterion8() {
  const std::string js = R"({"d": 6, "n": 300000, "seed": 1, "inlier": {"kind": "gaussian"},
    "adversary": {"kind": "scaled_cluster", "eps": 0.05, "magnitude": 10.0, "spread": 0.1}})";
  auto sc = rs::scenario_from_json(js);
  auto lab = rs::open_scenario(sc);
  rs::UnlabeledView view(*lab);
  rs::EstimatorConfig c;
  c.eps = 0.05;
  c.seed = 1;
  c.budget = 300000;
  auto t0 = Clock::now();
  Mat S = rs::robust_covariance_bounded(view, c);
  const double secs = seconds_since(t0);
  const Mat truth = Mat::Identity(6, 6);
  auto data = rs::drain(*rs::open_scenario(sc), 300000);
  const Mat emp = oracle::weighted_cov(data.X, Vec::Ones(data.X.cols()));
  const double e = (S - truth).norm(), eb = (emp - truth).norm();
  Verdict v;
  v.detail = fmt(" frob_err=%.4f", e) + fmt(" empirical_err=%.4f", eb) + fmt(" seconds=%.2f", secs);
  v.need(e <= 1.0, "Frobenius error <= 1.0");
  v.need(e <= eb / 5, "error <= 1/5 of empirical covariance error");
  v.need(secs <= 120.0, "runtime <= 120 s");
  return v;
}

Verdict criterion9() {
  Verdict v;
  rs::GradientOracleSpec o;
  o.tau_l = 1.0;
  o.tau_u = 4.0;
  o.step_eta = 0.4;
  o.theta_radius = 1e6;
  const int d = 6;
  Vec h(d);
  h << 1, 4, 1, 4, 4, 1;
  std::mt19937_64 g(9);
  Mat X0 = oracle::gaussian_matrix(d, 2, g);
  Vec star = X0.col(0), th0 = 10 * X0.col(1);
  auto grad = [&](const Vec& th, std::int64_t) { return (h.asDiagonal() * (th - star)).eval(); };
  auto gd = rs::robust_gd(o, grad, th0, 20);
  double worst = 0.0;
  for (std::size_t t = 0; t + 1 < gd.iterates.size(); ++t) {
    const double ratio = (gd.iterates[t + 1] - star).norm() / (gd.iterates[t] - star).norm();
    worst = std::max(worst, std::abs(ratio - 0.6));
  }
  v.need(worst <= 1e-9, "quadratic per-step ratio 0.6 +- 1e-9");

  auto regression = [](const std::string& file, const char* name, std::vector<double>& errs) {
    const std::string text = read_text(std::string(RS_SCENARIO_DIR) + "/" + file);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      rs::RunSpec spec = rs::runspec_from_json(text);
      spec.scenario.seed = seed;
      spec.config.seed = seed;
      spec.baselines.clear();
      spec.timing = false;
      for (const auto& row : rs::run(spec))
        if (row.estimator == name) errs.push_back(row.l2_error);
    }
  };
  std::vector<double> lin, logi;
  regression("accept_linreg.json", "linreg", lin);
  regression("accept_logreg.json", "logreg", logi);
  auto count = [](const std::vector<double>& e) {
    return std::count_if(e.begin(), e.end(), [](double x) { return x <= 0.5; });
  };
  const auto nl = count(lin), ng = count(logi);
  v.detail = fmt(" quad_ratio_dev=%.2e", worst) + fmt(" linreg_ok=%.0f/20", double(nl)) +
             fmt(" logreg_ok=%.0f/20", double(ng)) + fmt(" linreg_median=%.4f", median(lin)) +
             fmt(" logreg_median=%.4f", median(logi));
  v.need(lin.size() == 20 && nl >= 18, "linear regression error <= 0.5 on >= 18/20 seeds");
  v.need(logi.size() == 20 && ng >= 18, "logistic regression error <= 0.5 on >= 18/20 seeds");
  return v;
}

Verdict criterion10() {
  const double A = 0.1, B = 10.0;
  const int max_calls = static_cast<int>(std::ceil(std::log2(B / A))) + 1;
  auto r_fn = [](double s) { return 0.2 * s; };
  int fails = 0, worst_calls = 0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int seed = 0; seed < 100; ++seed) {
      auto rng = rs::seeded_rng(seed, 41);
      const int d = 4, m = 400;
      auto box = [&](double, double) {
        Vec acc = Vec::Zero(d);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < d; ++j) acc[j] += sigma * rng.normal();
        return (acc / m).eval();
      };
      auto res = rs::lepski_search(box, A, B, 0.05, r_fn);
      worst_calls = std::max(worst_calls, res.calls);
      if (res.estimate.norm() > 3 * r_fn(2 * sigma) || res.calls > max_calls) ++fails;
    }
  }
  Verdict v;
  v.detail = fmt(" failures=%.0f/300", fails) + fmt(" max_calls=%.0f", worst_calls) +
             fmt(" call_bound=%.0f", max_calls);
  v.need(fails == 0, "error <= 3 r(2 sigma) and calls bounded on every seed");
  return v;
}

Verdict criterion11() {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution coin(0.5);
  const int d = 8;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec th(d), x(d);
    for (int i = 0; i < d; ++i) {
      th[i] = nd(gen);
      x[i] = nd(gen);
    }
    const double y_lin = nd(gen), y_log = coin(gen) ? 1.0 : 0.0;
    Vec gl = rs::linear_gradient(th, x, y_lin), gg = rs::logistic_gradient(th, x, y_log);
    Vec fl(d), fg(d);
    for (int i = 0; i < d; ++i) {
      const double step = 1e-5 * std::max(1.0, std::abs(th[i]));
      Vec a = th, b = th;
      a[i] += step;
      b[i] -= step;
      fl[i] = (rs::linear_loss(a, x, y_lin) - rs::linear_loss(b, x, y_lin)) / (2 * step);
      fg[i] = (rs::logistic_loss(a, x, y_log) - rs::logistic_loss(b, x, y_log)) / (2 * step);
    }
    worst = std::max(worst, (gl - fl).norm() / std::max(1.0, gl.norm()));
    worst = std::max(worst, (gg - fg).norm() / std::max(1.0, gg.norm()));
  }
  Verdict v;
  v.detail = fmt(" worst_rel_dev=%.2e", worst);
  v.need(worst <= 1e-5, "gradients match central differences to 1e-5");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> checks = {
      criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
      criterion7, criterion8, criterion9, criterion10, criterion11};
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Verdict v;
    try {
      v = checks[i]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string(" [exception: ") + e.what() + "]";
    }
    print(static_cast<int>(i + 1), v);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failed,
              checks.size());
  return failed == 0 ? 0 : 1;
}
