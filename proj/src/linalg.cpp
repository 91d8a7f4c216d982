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

#include "robustream/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "robustream/error.hpp"

namespace robustream {

void KahanSum::add(double x) {
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
  else comp_ += (x - t) + sum_;
  sum_ = t;
}

KahanMatrix::KahanMatrix(Eigen::Index rows, Eigen::Index cols)
    : sum_(Eigen::MatrixXd::Zero(rows, cols)),
      comp_(Eigen::MatrixXd::Zero(rows, cols)),
      mem_(MemTag::kScratch, static_cast<std::size_t>(2 * rows * cols)) {}

void KahanMatrix::add(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  double* s = sum_.data();
  double* c = comp_.data();
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    const double* b = block.col(j).data();
    const Eigen::Index off = j * sum_.rows();
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      double x = b[i];
      double& si = s[off + i];
      double t = si + x;
      if (std::abs(si) >= std::abs(x)) c[off + i] += (si - t) + x;
      else c[off + i] += (x - t) + si;
      si = t;
    }
  }
}

void KahanMatrix::reset() {
  sum_.setZero();
  comp_.setZero();
}

Eigen::MatrixXd weighted_moment_apply(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& w,
                                      const Eigen::VectorXd& center,
                                      const Eigen::MatrixXd& V,
                                      Eigen::Index chunk) {
  const Eigen::Index d = X.rows(), n = X.cols(), m = V.cols();
  require(V.rows() == d && center.size() == d, ErrorCode::kInvalidInput,
          "moment apply: dimension mismatch");
  require(w.size() == 0 || w.size() == n, ErrorCode::kInvalidInput,
          "moment apply: weight length mismatch");
  chunk = std::max<Eigen::Index>(1, chunk);
  KahanMatrix acc(d, m);
  MemToken scratch(MemTag::kScratch, static_cast<std::size_t>(chunk * (d + m)));
  Eigen::MatrixXd Y, A;
  for (Eigen::Index s = 0; s < n; s += chunk) {
    const Eigen::Index c = std::min(chunk, n - s);
    Y = X.middleCols(s, c).colwise() - center;
    A.noalias() = Y.transpose() * V;
    if (w.size()) A = w.segment(s, c).asDiagonal() * A;
    acc.add(Y * A);
  }
  return acc.value();
}

double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::kInvalidInput, "median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace robustream
