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

#include "robustream/config.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "robustream/error.hpp"

namespace robustream {

double default_radius(std::int64_t d, double eps, double delta) {
  require(d > 0 && eps > 0.0 && delta >= 0.0, ErrorCode::kInvalidConfig,
          "default_radius: need d > 0, eps > 0, delta >= 0");
  return std::sqrt((static_cast<double>(d) / eps) * (1.0 + delta * delta / eps));
}

std::int64_t ceil_log2(double x) {
  if (!(x > 2.0)) return 1;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log2(x))));
}

void EstimatorConfig::validate() const {
  auto bad = [](const char* m) { fail(ErrorCode::kInvalidConfig, m); };
  if (!(eps >= 0.0 && eps < 0.5)) bad("eps must lie in [0, 1/2)");
  if (!(delta > 0.0)) bad("delta must be positive");
  if (delta < eps) bad("delta must be >= eps");
  if (!(radius_R > 0.0)) bad("radius_R must be positive");
  if (!(C1 >= 22.0)) bad("C1 must be >= 22");
  if (!(C2 > 0.0) || !(C3 > 0.0)) bad("C2 and C3 must be positive");
  if (!(c_T > 0.0) || !(c_r > 0.0)) bad("c_T and c_r must be positive");
  if (K < 1 || L < 1 || p < 1) bad("K, L, p must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) bad("tau must lie in (0, 1)");
  if (power_iters < 1 || power_restarts < 1 || lambda_repeats < 1)
    bad("power iteration counts must be >= 1");
  if (mean_groups < 1 || stop_groups < 1) bad("group counts must be >= 1");
  if (batch_n < 0) bad("batch_n must be >= 0");
  if (planned_iters < 1) bad("planned_iters must be >= 1");
  if (chunk < 1) bad("chunk must be >= 1");
  double shares[] = {share_naive_weight, share_fresh, share_lambda, share_stopping,
                     share_mean};
  double total = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) bad("budget shares must be nonnegative");
    total += s;
  }
  if (total > 1.0 + 1e-9) bad("budget shares sum above 1");
}

EstimatorConfig EstimatorConfig::resolved(std::int64_t d, std::uint64_t n) const {
  require(d > 0, ErrorCode::kInvalidConfig, "dimension must be positive");
  if (!(eps >= 0.0 && eps < 0.5))
    fail(ErrorCode::kInvalidConfig, "eps must lie in [0, 1/2)");
  EstimatorConfig c = *this;
  if (c.delta <= 0.0) c.delta = eps > 0.0 ? eps : 0.1;
  const double eps_eff = eps > 0.0 ? eps : 0.01;
  if (c.radius_R <= 0.0) c.radius_R = default_radius(d, eps_eff, c.delta);
  const double dd = static_cast<double>(d);
  if (c.p <= 0) c.p = ceil_log2(dd);
  if (c.K <= 0)
    c.K = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(
               K_mult * static_cast<double>(ceil_log2(dd)) *
               static_cast<double>(ceil_log2(dd * c.radius_R / eps_eff)))));
  if (!(c.tau > 0.0 && c.tau < 1.0))
    fail(ErrorCode::kInvalidConfig, "tau must lie in (0, 1)");
  const double log_kt = static_cast<double>(c.K) / c.tau;
  if (c.L <= 0)
    c.L = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(
               C_L * std::log((static_cast<double>(n) + dd) * log_kt))));
  if (c.power_iters <= 0) c.power_iters = 8 * ceil_log2(dd) + 10;
  if (c.power_restarts <= 0) c.power_restarts = ceil_log2(log_kt);
  if (c.lambda_repeats <= 0) c.lambda_repeats = ceil_log2(log_kt);
  const int groups = 2 * static_cast<int>(std::ceil(std::log(1.0 / c.tau))) + 1;
  if (c.mean_groups <= 0) c.mean_groups = groups;
  if (c.stop_groups <= 0) c.stop_groups = groups;
  c.validate();
  return c;
}

namespace {

using nlohmann::json;

template <class F>
void for_each_field(EstimatorConfig& c, F&& f) {
  f("eps", c.eps);
  f("delta", c.delta);
  f("radius_R", c.radius_R);
  f("C1", c.C1);
  f("C2", c.C2);
  f("C3", c.C3);
  f("c_T", c.c_T);
  f("c_r", c.c_r);
  f("K_mult", c.K_mult);
  f("C_L", c.C_L);
  f("K", c.K);
  f("L", c.L);
  f("p", c.p);
  f("batch_n", c.batch_n);
  f("seed", c.seed);
  f("tau", c.tau);
  f("power_iters", c.power_iters);
  f("power_restarts", c.power_restarts);
  f("budget", c.budget);
  f("planned_iters", c.planned_iters);
  f("share_naive_weight", c.share_naive_weight);
  f("share_fresh", c.share_fresh);
  f("share_lambda", c.share_lambda);
  f("share_stopping", c.share_stopping);
  f("share_mean", c.share_mean);
  f("lambda_repeats", c.lambda_repeats);
  f("mean_groups", c.mean_groups);
  f("stop_groups", c.stop_groups);
  f("fresh_per_row", c.fresh_per_row);
  f("chunk", c.chunk);
}

}  // namespace

std::string config_to_json(const EstimatorConfig& c) {
  json j = json::object();
  EstimatorConfig copy = c;
  for_each_field(copy, [&](const char* name, auto& v) { j[name] = v; });
  return j.dump();
}

EstimatorConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config json: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "config json must be an object");
  EstimatorConfig c;
  std::size_t used = 0;
  try {
    for_each_field(c, [&](const char* name, auto& v) {
      if (j.contains(name)) {
        j.at(name).get_to(v);
        ++used;
      }
    });
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config json: ") + e.what());
  }
  if (used != j.size()) {
    EstimatorConfig probe;
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for_each_field(probe, [&](const char* name, auto&) {
        if (it.key() == name) known = true;
      });
      if (!known) fail(ErrorCode::kInvalidConfig, "unknown config key: " + it.key());
    }
  }
  return c;
}

}  // namespace robustream
