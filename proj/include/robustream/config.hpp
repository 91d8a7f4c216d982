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
#include <string>

namespace robustream {

// Zero or negative values of the derived fields (delta, radius_R, K, L, p,
// batch_n, power_iters, power_restarts, lambda_repeats) mean "derive a
// default" in resolve().
struct EstimatorConfig {
  double eps = 0.1;
  double delta = 0.0;
  double radius_R = 0.0;
  double C1 = 22.0;
  double C2 = 50.0;
  double C3 = 0.1;
  double c_T = 0.01;    // T = c_T * lambda_hat * ||U||_F^2
  double c_r = 4.0;     // r = c_r * ||U||_F^2 * (6R)^2
  double K_mult = 2.0;  // K = K_mult * ceil(log2 d) * ceil(log2(dR/eps))
  double C_L = 25.0;    // L = ceil(C_L * ln((n + d) K / tau))
  std::int64_t K = 0;
  std::int64_t L = 0;
  std::int64_t p = 0;
  std::int64_t batch_n = 0;
  std::uint64_t seed = 0;
  double tau = 0.05;
  std::int64_t power_iters = 0;
  std::int64_t power_restarts = 0;

  // Streaming.
  std::uint64_t budget = 0;  // total stream points; 0 = until exhausted
  int planned_iters = 4;
  double share_naive_weight = 0.05;
  double share_fresh = 0.60;
  double share_lambda = 0.15;
  double share_stopping = 0.10;
  double share_mean = 0.10;
  std::int64_t lambda_repeats = 0;
  int mean_groups = 0;
  int stop_groups = 0;
  bool fresh_per_row = false;

  std::int64_t chunk = 256;  // columns per reduction block

  // Fills derived defaults for dimension d and sample count n (dataset
  // size, or budget for streaming) and validates. Throws InvalidConfig.
  EstimatorConfig resolved(std::int64_t d, std::uint64_t n) const;
  void validate() const;
};

double default_radius(std::int64_t d, double eps, double delta);
std::int64_t ceil_log2(double x);  // max(1, ceil(log2 x))

std::string config_to_json(const EstimatorConfig& c);
EstimatorConfig config_from_json(const std::string& text);

}  // namespace robustream
