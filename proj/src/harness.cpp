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

#include "robustream/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "robustream/batch_filter.hpp"
#include "robustream/error.hpp"
#include "robustream/io.hpp"
#include "robustream/ledger.hpp"
#include "robustream/linalg.hpp"
#include "robustream/streaming.hpp"

namespace robustream {

namespace {

using nlohmann::json;

bool is_regression_kind(EstimatorKind k) {
  return k == EstimatorKind::kLinreg || k == EstimatorKind::kLogreg;
}

bool regression_inliers(const Scenario& s) {
  return s.inlier.kind == InlierKind::kLinear || s.inlier.kind == InlierKind::kLogistic;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

using Aggregator = std::function<Vec(const Mat&)>;

Aggregator baseline_fn(const std::string& name, double eps) {
  if (name == "sample_mean") return sample_mean;
  if (name == "coordinate_median") return coordinate_median;
  if (name == "trimmed_mean") return [eps](const Mat& X) { return trimmed_mean(X, eps); };
  fail(ErrorCode::kInvalidConfig, "unknown baseline: " + name);
}

// Target-space truth: the inlier mean, vec of the second moment, or theta.
Vec truth_of(const RunSpec& spec) {
  const Scenario& s = spec.scenario;
  if (spec.estimator == EstimatorKind::kCovariance) {
    const Eigen::Index d = s.d;
    Mat cov;
    if (s.inlier.cov.size()) cov = s.inlier.cov;
    else if (s.inlier.cov_diag.size()) cov = s.inlier.cov_diag.asDiagonal();
    else cov = Mat::Identity(d, d);
    Vec m = s.true_mean();
    Mat second = cov + m * m.transpose();
    return Eigen::Map<const Vec>(second.data(), d * d);
  }
  return s.true_mean();
}

Mat kronecker_rows(const Mat& X) {
  const Eigen::Index d = X.rows();
  Mat Y(d * d, X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    Eigen::Map<Mat> m(Y.col(i).data(), d, d);
    m.noalias() = X.col(i) * X.col(i).transpose();
  }
  return Y;
}

Mat replay(const Scenario& s, std::uint64_t count) {
  auto st = open_scenario(s);
  return drain(*st, count).X;
}

void check_spec(const RunSpec& spec) {
  const bool reg = regression_inliers(spec.scenario);
  if (is_regression_kind(spec.estimator) && !reg)
    fail(ErrorCode::kInvalidConfig, "regression estimator needs a linear or logistic scenario");
  if (!is_regression_kind(spec.estimator) && reg)
    fail(ErrorCode::kInvalidConfig, "scenario emits regression pairs; use linreg or logreg");
  if (spec.estimator == EstimatorKind::kLogreg && spec.scenario.inlier.kind != InlierKind::kLogistic)
    fail(ErrorCode::kInvalidConfig, "logreg needs a logistic scenario");
  if (spec.estimator == EstimatorKind::kLinreg && spec.scenario.inlier.kind != InlierKind::kLinear)
    fail(ErrorCode::kInvalidConfig, "linreg needs a linear scenario");
  require(spec.scenario.n > 0, ErrorCode::kInvalidConfig, "scenario n must be positive");
}

RegressionOptions regression_options(const RunSpec& spec, std::uint64_t slice) {
  RegressionOptions o;
  o.oracle.theta_radius = spec.theta_radius;
  o.oracle.tau_l = spec.tau_l;
  o.oracle.tau_u = spec.tau_u;
  o.oracle.step_eta = spec.step_eta;
  o.config = spec.config;
  o.config.budget = slice;
  o.steps = spec.gd_steps;
  if (spec.sigma > 0.0) o.sigma = spec.sigma;
  o.lepski = spec.lepski;
  return o;
}

struct EstimatorOutcome {
  Vec estimate;
  std::int64_t iters = 0;
  std::uint64_t used = 0;
  bool certified = false;
};

EstimatorOutcome run_estimator(const RunSpec& spec, MemoryLedger& ledger) {
  const Scenario& s = spec.scenario;
  EstimatorConfig cfg = spec.config;
  if (cfg.budget == 0) cfg.budget = s.n;
  EstimatorOutcome out;
  switch (spec.estimator) {
    case EstimatorKind::kStreaming: {
      auto st = open_scenario(s);
      UnlabeledView v(*st);
      EstimateResult r = robust_mean_streaming(v, cfg, &ledger);
      out = {r.mu, r.iterations, v.consumed(), r.status == RunStatus::kCertified};
      break;
    }
    case EstimatorKind::kBatch: {
      Mat X = replay(s, s.n);
      EstimateResult r;
      {
        LedgerScope scope(&ledger);
        r = robust_mean_batch(X, cfg);
      }
      out = {r.mu, r.iterations, static_cast<std::uint64_t>(X.cols()),
             r.status == RunStatus::kCertified};
      break;
    }
    case EstimatorKind::kMultipass: {
      Mat X = replay(s, s.n);
      MatrixSource src(X);
      EstimateResult r = robust_mean_multipass(src, cfg, &ledger);
      out = {r.mu, r.iterations, static_cast<std::uint64_t>(X.cols()),
             r.status == RunStatus::kCertified};
      break;
    }
    case EstimatorKind::kCovariance: {
      auto st = open_scenario(s);
      UnlabeledView v(*st);
      EstimateResult r;
      Mat S;
      {
        LedgerScope scope(&ledger);
        S = robust_covariance_bounded(v, cfg, {}, &r);
      }
      out = {Eigen::Map<const Vec>(S.data(), S.size()), r.iterations, v.consumed(),
             r.status == RunStatus::kCertified};
      break;
    }
    case EstimatorKind::kLepski: {
      auto st = open_scenario(s);
      UnlabeledView v(*st);
      int calls = 0;
      Vec mu;
      {
        LedgerScope scope(&ledger);
        mu = robust_gradient_estimator(v, cfg, std::nullopt, spec.lepski, &calls);
      }
      out = {mu, calls, v.consumed(), true};
      break;
    }
    case EstimatorKind::kLinreg:
    case EstimatorKind::kLogreg: {
      auto st = open_scenario(s);
      UnlabeledView v(*st);
      RegressionOptions o = regression_options(spec, spec.config.budget ? spec.config.budget : 100000);
      RegressionResult r;
      {
        LedgerScope scope(&ledger);
        r = spec.estimator == EstimatorKind::kLinreg
                ? linear_regression_robust(v, o, Vec::Zero(s.d))
                : logistic_regression_robust(v, o, Vec::Zero(s.d));
      }
      out = {r.theta, r.gd.steps, v.consumed(), true};
      break;
    }
  }
  return out;
}

// Baseline in target space over the same point sequence.
EstimatorOutcome run_baseline(const RunSpec& spec, const Aggregator& agg, std::uint64_t used) {
  const Scenario& s = spec.scenario;
  EstimatorOutcome out;
  if (is_regression_kind(spec.estimator)) {
    auto st = open_scenario(s);
    UnlabeledView v(*st);
    const std::uint64_t slice = spec.config.budget ? spec.config.budget : 100000;
    RegressionOptions o = regression_options(spec, slice);
    const LossKind kind = spec.estimator == EstimatorKind::kLinreg ? LossKind::kLinearRegression
                                                                   : LossKind::kLogisticRegression;
    GradientOracleSpec oracle = o.oracle;
    GradientFn g = [&](const Vec& theta, std::int64_t) {
      GradientStream gs(v, kind, theta, 1.0);
      Mat G(theta.size(), static_cast<Eigen::Index>(slice));
      Eigen::Index k = 0;
      while (k < G.cols() && gs.next(G.col(k).data())) ++k;
      require(k > 0, ErrorCode::kStreamExhausted, "no data for the gradient step");
      return agg(G.leftCols(k));
    };
    GdResult r = robust_gd(oracle, g, Vec::Zero(s.d), spec.gd_steps);
    out = {r.theta, r.steps, v.consumed(), false};
    return out;
  }
  Mat X = replay(s, std::max<std::uint64_t>(used, 1));
  if (spec.estimator == EstimatorKind::kCovariance) X = kronecker_rows(X);
  out.estimate = agg(X);
  out.used = static_cast<std::uint64_t>(X.cols());
  return out;
}

}  // namespace

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kStreaming: return "streaming";
    case EstimatorKind::kBatch: return "batch";
    case EstimatorKind::kMultipass: return "multipass";
    case EstimatorKind::kCovariance: return "covariance";
    case EstimatorKind::kLinreg: return "linreg";
    case EstimatorKind::kLogreg: return "logreg";
    case EstimatorKind::kLepski: return "lepski-wrapped";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  for (EstimatorKind k : {EstimatorKind::kStreaming, EstimatorKind::kBatch,
                          EstimatorKind::kMultipass, EstimatorKind::kCovariance,
                          EstimatorKind::kLinreg, EstimatorKind::kLogreg, EstimatorKind::kLepski})
    if (name == estimator_name(k)) return k;
  fail(ErrorCode::kInvalidConfig, "unknown estimator: " + name);
}

RunSpec runspec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("run spec json: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kInvalidConfig, "run spec must be a JSON object");
  static const std::set<std::string> known = {
      "scenario", "estimator", "config", "baselines", "output", "timing", "gd_steps",
      "step_eta", "theta_radius", "tau_l", "tau_u", "sigma", "lepski"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) fail(ErrorCode::kInvalidConfig, "unknown run spec key: " + it.key());
  RunSpec spec;
  try {
    require(j.contains("scenario"), ErrorCode::kInvalidConfig, "run spec needs a scenario");
    spec.scenario = scenario_from_json(j.at("scenario").dump());
    spec.estimator = parse_estimator(j.value("estimator", std::string("streaming")));
    if (j.contains("config")) spec.config = config_from_json(j.at("config").dump());
    spec.baselines = j.value("baselines", std::vector<std::string>{});
    for (const auto& b : spec.baselines) (void)baseline_fn(b, 0.0);
    spec.output = j.value("output", std::string());
    spec.timing = j.value("timing", true);
    spec.gd_steps = j.value("gd_steps", spec.gd_steps);
    spec.step_eta = j.value("step_eta", spec.step_eta);
    spec.theta_radius = j.value("theta_radius", spec.theta_radius);
    spec.tau_l = j.value("tau_l", spec.tau_l);
    spec.tau_u = j.value("tau_u", spec.tau_u);
    spec.sigma = j.value("sigma", spec.sigma);
    if (j.contains("lepski")) {
      const json& l = j.at("lepski");
      spec.lepski.A = l.value("A", spec.lepski.A);
      spec.lepski.B = l.value("B", spec.lepski.B);
      spec.lepski.gamma = l.value("gamma", spec.lepski.gamma);
      spec.lepski.r_mult = l.value("r_mult", spec.lepski.r_mult);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("run spec json: ") + e.what());
  }
  return spec;
}

std::string runspec_to_json(const RunSpec& spec) {
  json j;
  j["scenario"] = json::parse(scenario_to_json(spec.scenario));
  j["estimator"] = estimator_name(spec.estimator);
  j["config"] = json::parse(config_to_json(spec.config));
  j["baselines"] = spec.baselines;
  j["output"] = spec.output;
  j["timing"] = spec.timing;
  j["gd_steps"] = spec.gd_steps;
  j["step_eta"] = spec.step_eta;
  j["theta_radius"] = spec.theta_radius;
  j["tau_l"] = spec.tau_l;
  j["tau_u"] = spec.tau_u;
  j["sigma"] = spec.sigma;
  j["lepski"] = {{"A", spec.lepski.A},
                 {"B", spec.lepski.B},
                 {"gamma", spec.lepski.gamma},
                 {"r_mult", spec.lepski.r_mult}};
  return j.dump();
}

std::string run_key(const RunSpec& spec) {
  RunSpec k = spec;
  k.output.clear();
  k.timing = true;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(runspec_to_json(k))));
  return buf;
}

Vec sample_mean(const Mat& X) {
  require(X.cols() > 0, ErrorCode::kInvalidInput, "sample_mean: no points");
  KahanMatrix acc(X.rows(), 1);
  const Eigen::Index chunk = 1024;
  for (Eigen::Index s = 0; s < X.cols(); s += chunk)
    acc.add(X.middleCols(s, std::min(chunk, X.cols() - s)).rowwise().sum());
  return acc.value().col(0) / static_cast<double>(X.cols());
}

Vec coordinate_median(const Mat& X) {
  require(X.cols() > 0, ErrorCode::kInvalidInput, "coordinate_median: no points");
  Vec out(X.rows());
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) row[static_cast<std::size_t>(i)] = X(j, i);
    out(j) = median(row);
  }
  return out;
}

Vec trimmed_mean(const Mat& X, double eps) {
  const Eigen::Index n = X.cols();
  require(n > 0, ErrorCode::kInvalidInput, "trimmed_mean: no points");
  require(eps >= 0.0 && eps < 0.5, ErrorCode::kInvalidInput, "trimmed_mean: eps in [0, 1/2)");
  const Eigen::Index k = static_cast<Eigen::Index>(std::ceil(eps * static_cast<double>(n)));
  require(2 * k < n, ErrorCode::kInvalidInput, "trimmed_mean: too few points to trim");
  Vec out(X.rows());
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = X(j, i);
    std::sort(row.begin(), row.end());
    KahanSum s;
    for (Eigen::Index i = k; i < n - k; ++i) s.add(row[static_cast<std::size_t>(i)]);
    out(j) = s.value() / static_cast<double>(n - 2 * k);
  }
  return out;
}

std::vector<ExperimentReport> run(const RunSpec& spec) {
  check_spec(spec);
  const Vec truth = truth_of(spec);
  const std::string id = run_key(spec);
  std::vector<ExperimentReport> rows;

  ExperimentReport r;
  r.run_id = id;
  r.estimator = estimator_name(spec.estimator);
  r.d = spec.scenario.d;
  r.n = spec.scenario.n;
  r.eps = spec.scenario.adversary.eps;
  r.seed = spec.scenario.seed;
  MemoryLedger ledger;
  std::uint64_t used = spec.config.budget ? spec.config.budget : spec.scenario.n;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    EstimatorOutcome o = run_estimator(spec, ledger);
    r.l2_error = l2_error(o.estimate, truth);
    r.iters = o.iters;
    r.samples_used = o.used;
    r.certified = o.certified;
    used = o.used;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    r.l2_error = std::numeric_limits<double>::quiet_NaN();
    r.failure = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  r.peak_mem_floats = ledger.peak();
  r.wall_ms = spec.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
  rows.push_back(r);

  for (const std::string& b : spec.baselines) {
    ExperimentReport br;
    br.run_id = id;
    br.estimator = b;
    br.d = r.d;
    br.n = r.n;
    br.eps = r.eps;
    br.seed = r.seed;
    const auto b0 = std::chrono::steady_clock::now();
    try {
      EstimatorOutcome o = run_baseline(spec, baseline_fn(b, spec.config.eps), used);
      br.l2_error = l2_error(o.estimate, truth);
      br.iters = o.iters;
      br.samples_used = o.used;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidConfig) throw;
      br.l2_error = std::numeric_limits<double>::quiet_NaN();
      br.failure = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    const auto b1 = std::chrono::steady_clock::now();
    br.wall_ms = spec.timing ? std::chrono::duration<double, std::milli>(b1 - b0).count() : 0.0;
    rows.push_back(br);
  }
  if (!spec.output.empty()) append_report(spec.output, rows);
  return rows;
}

const char* const kReportSchema = "# schema: robustream-report/1";

std::string report_header() {
  return std::string(kReportSchema) +
         "\nrun_id,estimator,d,n,eps,seed,l2_error,iters,samples_used,peak_mem_floats,wall_ms,"
         "certified\n";
}

std::string report_row(const ExperimentReport& r) {
  std::ostringstream os;
  os << r.run_id << ',' << r.estimator << ',' << r.d << ',' << r.n << ',' << fmt_double(r.eps)
     << ',' << r.seed << ',' << fmt_double(r.l2_error) << ',' << r.iters << ',' << r.samples_used
     << ',' << r.peak_mem_floats << ',' << fmt_double(r.wall_ms) << ',' << (r.certified ? 1 : 0)
     << '\n';
  return os.str();
}

void append_report(const std::string& path, const std::vector<ExperimentReport>& rows) {
  bool fresh = true;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) fresh = false;
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::kIo, "cannot open report for append: " + path);
  if (fresh) out << report_header();
  for (const auto& r : rows) out << report_row(r);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

SweepGrid grid_from_json(const std::string& text) {
  SweepGrid g;
  try {
    json j = json::parse(text);
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "eps" && it.key() != "d" && it.key() != "n" && it.key() != "seed")
        fail(ErrorCode::kInvalidConfig, "unknown grid axis: " + it.key());
    g.eps = j.value("eps", std::vector<double>{});
    g.d = j.value("d", std::vector<std::int64_t>{});
    g.n = j.value("n", std::vector<std::uint64_t>{});
    g.seed = j.value("seed", std::vector<std::uint64_t>{});
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("grid json: ") + e.what());
  }
  return g;
}

RunSpec sweep_cell(const std::string& template_json, const double* eps, const std::int64_t* d,
                   const std::uint64_t* n, const std::uint64_t* seed) {
  json j;
  try {
    j = json::parse(template_json);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("template json: ") + e.what());
  }
  require(j.is_object() && j.contains("scenario"), ErrorCode::kInvalidConfig,
          "template needs a scenario");
  json& sc = j["scenario"];
  if (!j.contains("config")) j["config"] = json::object();
  json& cf = j["config"];
  if (eps) {
    sc["adversary"]["eps"] = *eps;
    cf["eps"] = *eps;
  }
  if (d) sc["d"] = *d;
  if (n) {
    sc["n"] = *n;
    if (cf.contains("budget")) cf["budget"] = *n;
  }
  if (seed) {
    sc["seed"] = *seed;
    cf["seed"] = *seed;
  }
  return runspec_from_json(j.dump());
}

std::vector<ExperimentReport> sweep(const std::string& template_json, const SweepGrid& grid,
                                    const std::string& out) {
  std::set<std::string> done;
  {
    std::ifstream in(out);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("run_id,", 0) == 0) continue;
      done.insert(line.substr(0, line.find(',')));
    }
  }
  auto axis = [](const auto& v) { return v.empty() ? 1 : v.size(); };
  std::vector<ExperimentReport> written;
  for (std::size_t a = 0; a < axis(grid.eps); ++a)
    for (std::size_t b = 0; b < axis(grid.d); ++b)
      for (std::size_t c = 0; c < axis(grid.n); ++c)
        for (std::size_t e = 0; e < axis(grid.seed); ++e) {
          RunSpec spec = sweep_cell(template_json, grid.eps.empty() ? nullptr : &grid.eps[a],
                                    grid.d.empty() ? nullptr : &grid.d[b],
                                    grid.n.empty() ? nullptr : &grid.n[c],
                                    grid.seed.empty() ? nullptr : &grid.seed[e]);
          spec.output.clear();
          const std::string key = run_key(spec);
          if (done.count(key)) continue;
          std::vector<ExperimentReport> rows = run(spec);
          append_report(out, rows);
          done.insert(key);
          written.insert(written.end(), rows.begin(), rows.end());
        }
  return written;
}

}  // namespace robustream
