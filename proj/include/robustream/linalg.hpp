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

#include <vector>

#include <Eigen/Dense>

#include "robustream/ledger.hpp"

namespace robustream {

// Neumaier-compensated scalar sum.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Element-wise compensated accumulation of equally shaped blocks. Each block
// is one chunk's partial result, so the total depends on the chunk size only
// through rounding.
class KahanMatrix {
 public:
  KahanMatrix(Eigen::Index rows, Eigen::Index cols);
  void add(const Eigen::Ref<const Eigen::MatrixXd>& block);
  Eigen::MatrixXd value() const { return sum_ + comp_; }
  void reset();

 private:
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd comp_;
  MemToken mem_;
};

// Block second-moment product used by every covariance mat-vec:
//   out = sum_i w_i (x_i - c)(x_i - c)^T V
// over the columns of X, processed in chunks with compensated reduction.
// w may be empty (all ones).
Eigen::MatrixXd weighted_moment_apply(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& w,
                                      const Eigen::VectorXd& center,
                                      const Eigen::MatrixXd& V,
                                      Eigen::Index chunk);

double median(std::vector<double> v);

}  // namespace robustream
