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

#include "robustream/result.hpp"

#include <json.hpp>

namespace robustream {

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kCertified: return "certified";
    case RunStatus::kNotCertified: return "not_certified";
    case RunStatus::kBudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

std::string trace_to_json(const EstimateResult& r) {
  using nlohmann::json;
  json j;
  j["schema"] = "robustream-trace/1";
  j["status"] = status_name(r.status);
  j["iterations"] = r.iterations;
  j["samples_used"] = r.samples_used;
  j["passes"] = r.passes;
  j["mu"] = std::vector<double>(r.mu.data(), r.mu.data() + r.mu.size());
  json its = json::array();
  for (const auto& t : r.trace) {
    its.push_back({{"t", t.t},
                   {"lambda_hat", t.lambda_hat},
                   {"weight_mass", t.weight_mass},
                   {"frob_sq", t.frob_sq},
                   {"T", t.T},
                   {"threshold", t.threshold},
                   {"r_bound", t.r_bound},
                   {"ell_max", t.ell_max},
                   {"exponent", t.exponent},
                   {"removed_mass", t.removed_mass},
                   {"samples_used", t.samples_used},
                   {"passes", t.passes},
                   {"filter_fallback", t.filter_fallback}});
  }
  j["trace"] = its;
  return j.dump();
}

}  // namespace robustream
