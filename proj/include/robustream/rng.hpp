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
#include <random>

#include <Eigen/Dense>

namespace robustream {

// Deterministic random source keyed by (seed, stream_id). Streams with
// different ids are seeded through SplitMix64 so they do not overlap in
// practice.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double normal() { return normal_(engine_); }
  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

  void fill_normal(Eigen::Ref<Eigen::MatrixXd> m);
  void fill_rademacher(Eigen::Ref<Eigen::MatrixXd> m);
  Eigen::VectorXd unit_vector(Eigen::Index d);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

Rng seeded_rng(std::uint64_t seed, std::uint64_t stream_id);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace robustream
