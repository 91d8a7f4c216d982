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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robustream/ledger.hpp"

namespace robustream {

using Point = Eigen::VectorXd;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// L x d matrix whose rows are the scaled sketch vectors.
class Sketch {
 public:
  Sketch() = default;
  explicit Sketch(Mat rows);

  const Mat& rows() const { return rows_; }
  double frob_sq() const { return frob_sq_; }
  Eigen::Index num_rows() const { return rows_.rows(); }
  Eigen::Index dim() const { return rows_.cols(); }

 private:
  Mat rows_;
  double frob_sq_ = 0.0;
  MemToken mem_;
};

struct FilterRound {
  Point center;
  Sketch sketch;
  double threshold = 0.0;
  std::int64_t exponent = 0;
  double r_bound = 1.0;
  MemToken mem;  // center plus the four scalars

  FilterRound() = default;
  FilterRound(Point c, Sketch s, double thr, std::int64_t ell, double r);
};

struct FilterHistory {
  Point init_center;
  double init_radius = std::numeric_limits<double>::infinity();
  std::vector<FilterRound> rounds;
  MemToken mem;

  FilterHistory() = default;
  FilterHistory(Point center, double radius);

  Eigen::Index dim() const { return init_center.size(); }
};

struct Score {
  double g_tilde;
  double tau_tilde;
};

Score score_eval(const FilterRound& round, const Eigen::Ref<const Vec>& x);

// Weight of x under the first `upto` rounds (all rounds by default).
double weight_eval(const FilterHistory& h, const Eigen::Ref<const Vec>& x,
                   std::size_t upto = std::numeric_limits<std::size_t>::max());

// Natural log of a single round's factor (1 - tau/r)^ell; -inf when the
// factor is zero.
double log_round_factor(double tau_tilde, double r, std::int64_t ell);

// Column-wise versions over a d x c block. Scratch is L x c per round.
void score_eval_block(const FilterRound& round, const Eigen::Ref<const Mat>& X,
                      Eigen::Ref<Vec> g_tilde, Eigen::Ref<Vec> tau_tilde);
void weight_eval_block(const FilterHistory& h, const Eigen::Ref<const Mat>& X,
                       Eigen::Ref<Vec> w,
                       std::size_t upto = std::numeric_limits<std::size_t>::max());

std::string history_to_json(const FilterHistory& h);
FilterHistory history_from_json(const std::string& text);

}  // namespace robustream
