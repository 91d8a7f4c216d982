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
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robustream/stream.hpp"

namespace robustream {

// Binary layout: "RSTR", u32 version (1), u32 d, u64 n, then n*d
// little-endian f64 row-major. The labeled variant appends n label bytes
// (1 = inlier, 0 = outlier).
struct BinaryHeader {
  std::uint32_t d = 0;
  std::uint64_t n = 0;
};

enum class PointFormat { kBinary, kCsv };

PointFormat parse_format(const std::string& name);

void write_points_binary(const std::string& path, const Eigen::MatrixXd& X,
                         const std::vector<std::uint8_t>* labels = nullptr);
Eigen::MatrixXd read_points_binary(const std::string& path,
                                   std::vector<std::uint8_t>* labels = nullptr);

void write_points_csv(const std::string& path, const Eigen::MatrixXd& X);
// dim = 0 infers d from the first line.
Eigen::MatrixXd read_points_csv(const std::string& path, Eigen::Index dim = 0);

Eigen::MatrixXd read_points(const std::string& path, PointFormat fmt,
                            Eigen::Index dim = 0);

// Streams a binary point file without loading it.
class BinaryFileStream : public SampleStream {
 public:
  static std::unique_ptr<BinaryFileStream> open(const std::string& path);
  std::uint64_t size() const { return n_; }

 protected:
  bool produce(double* out) override;

 private:
  BinaryFileStream(std::ifstream in, std::uint32_t d, std::uint64_t n);
  std::ifstream in_;
  std::uint64_t n_;
  std::uint64_t pos_ = 0;
};

class CsvFileStream : public SampleStream {
 public:
  static std::unique_ptr<CsvFileStream> open(const std::string& path,
                                             Eigen::Index dim);

 protected:
  bool produce(double* out) override;

 private:
  CsvFileStream(std::ifstream in, Eigen::Index d);
  std::ifstream in_;
  std::uint64_t line_ = 0;
};

std::unique_ptr<SampleStream> open_point_stream(const std::string& path,
                                                PointFormat fmt,
                                                Eigen::Index dim = 0);

// Re-iterable file source for the multi-pass estimator.
class FileSource : public ReiterableSource {
 public:
  FileSource(std::string path, PointFormat fmt, Eigen::Index dim = 0);
  Eigen::Index dimension() const override { return d_; }
  std::uint64_t size() const override { return n_; }

 protected:
  std::unique_ptr<SampleStream> make_pass() override;

 private:
  std::string path_;
  PointFormat fmt_;
  Eigen::Index d_ = 0;
  std::uint64_t n_ = 0;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace robustream
