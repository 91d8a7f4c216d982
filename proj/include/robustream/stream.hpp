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
#include <functional>
#include <memory>

#include <Eigen/Dense>

namespace robustream {

// Single-consumption source of d-dimensional points. There is no way to
// rewind; every successful next() yields a new point and bumps consumed().
class SampleStream {
 public:
  explicit SampleStream(Eigen::Index dim);
  virtual ~SampleStream() = default;
  SampleStream(const SampleStream&) = delete;
  SampleStream& operator=(const SampleStream&) = delete;

  Eigen::Index dimension() const { return dim_; }
  std::uint64_t consumed() const { return consumed_; }

  // Writes the next point into out (size d). Returns false when exhausted.
  // Non-finite coordinates raise InvalidInput.
  bool next(double* out);
  bool next(Eigen::Ref<Eigen::VectorXd> out) { return next(out.data()); }

 protected:
  virtual bool produce(double* out) = 0;

 private:
  Eigen::Index dim_;
  std::uint64_t consumed_ = 0;
};

// Streams the columns of a d x n matrix once.
class MatrixStream : public SampleStream {
 public:
  explicit MatrixStream(const Eigen::MatrixXd& points);

 protected:
  bool produce(double* out) override;

 private:
  const Eigen::MatrixXd& pts_;
  Eigen::Index pos_ = 0;
};

// Streams points from a callable; returns false to end the stream.
class FunctionStream : public SampleStream {
 public:
  using Producer = std::function<bool(double*)>;
  FunctionStream(Eigen::Index dim, Producer producer);

 protected:
  bool produce(double* out) override { return producer_(out); }

 private:
  Producer producer_;
};

// Caps an inner stream at `limit` points.
class LimitedStream : public SampleStream {
 public:
  LimitedStream(SampleStream& inner, std::uint64_t limit);

 protected:
  bool produce(double* out) override;

 private:
  SampleStream& inner_;
  std::uint64_t left_;
};

// Dataset that can be read more than once; every open_pass() counts a pass.
class ReiterableSource {
 public:
  virtual ~ReiterableSource() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual std::uint64_t size() const = 0;
  std::unique_ptr<SampleStream> open_pass();
  std::uint64_t passes() const { return passes_; }

 protected:
  virtual std::unique_ptr<SampleStream> make_pass() = 0;

 private:
  std::uint64_t passes_ = 0;
};

class MatrixSource : public ReiterableSource {
 public:
  explicit MatrixSource(const Eigen::MatrixXd& points) : pts_(points) {}
  Eigen::Index dimension() const override { return pts_.rows(); }
  std::uint64_t size() const override { return pts_.cols(); }

 protected:
  std::unique_ptr<SampleStream> make_pass() override;

 private:
  const Eigen::MatrixXd& pts_;
};

}  // namespace robustream
