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

#include "robustream/stream.hpp"

#include <cmath>
#include <cstring>

#include "robustream/error.hpp"

namespace robustream {

SampleStream::SampleStream(Eigen::Index dim) : dim_(dim) {
  require(dim > 0, ErrorCode::kInvalidInput, "stream dimension must be positive");
}

bool SampleStream::next(double* out) {
  if (!produce(out)) return false;
  for (Eigen::Index i = 0; i < dim_; ++i)
    if (!std::isfinite(out[i]))
      fail(ErrorCode::kInvalidInput,
           "non-finite coordinate in point " + std::to_string(consumed_));
  ++consumed_;
  return true;
}

MatrixStream::MatrixStream(const Eigen::MatrixXd& points)
    : SampleStream(points.rows()), pts_(points) {}

bool MatrixStream::produce(double* out) {
  if (pos_ >= pts_.cols()) return false;
  std::memcpy(out, pts_.col(pos_).data(), sizeof(double) * pts_.rows());
  ++pos_;
  return true;
}

FunctionStream::FunctionStream(Eigen::Index dim, Producer producer)
    : SampleStream(dim), producer_(std::move(producer)) {}

LimitedStream::LimitedStream(SampleStream& inner, std::uint64_t limit)
    : SampleStream(inner.dimension()), inner_(inner), left_(limit) {}

bool LimitedStream::produce(double* out) {
  if (left_ == 0) return false;
  if (!inner_.next(out)) return false;
  --left_;
  return true;
}

std::unique_ptr<SampleStream> ReiterableSource::open_pass() {
  ++passes_;
  return make_pass();
}

std::unique_ptr<SampleStream> MatrixSource::make_pass() {
  return std::make_unique<MatrixStream>(pts_);
}

}  // namespace robustream
