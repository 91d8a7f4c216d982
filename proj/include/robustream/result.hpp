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
#include <vector>

#include "robustream/config.hpp"
#include "robustream/history.hpp"

namespace robustream {

enum class RunStatus { kCertified = 0, kNotCertified = 1, kBudgetExhausted = 2 };

const char* status_name(RunStatus s);

// One record per loop iteration. The final (certifying) iteration has
// exponent 0 and no sketch.
struct IterationRecord {
  int t = 0;
  double lambda_hat = 0.0;
  double weight_mass = 0.0;   // E_P[w_t] (exact in batch, estimated otherwise)
  double frob_sq = 0.0;       // ||U_t||_F^2
  double T = 0.0;
  double threshold = 0.0;
  double r_bound = 0.0;
  std::int64_t ell_max = 0;
  std::int64_t exponent = 0;
  double removed_mass = 0.0;  // E_P[w_t - w_{t+1}] over all points, unlabeled
  std::uint64_t samples_used = 0;  // cumulative stream draws
  std::uint64_t passes = 0;        // cumulative dataset passes (multipass)
  bool filter_fallback = false;
};

struct EstimateResult {
  Vec mu;
  RunStatus status = RunStatus::kNotCertified;
  FilterHistory history;
  std::vector<IterationRecord> trace;
  int iterations = 0;
  std::uint64_t samples_used = 0;
  std::uint64_t passes = 0;
  EstimatorConfig config;  // resolved
};

std::string trace_to_json(const EstimateResult& r);

}  // namespace robustream
