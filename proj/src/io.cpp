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

#include "robustream/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include "robustream/error.hpp"

namespace robustream {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& o, T v) {
  v = to_le(v);
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& in, T& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
  v = to_le(v);
  return true;
}

BinaryHeader read_header(std::istream& in, const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::kIo, path + ": not an RSTR point file");
  std::uint32_t version = 0;
  BinaryHeader h;
  if (!get(in, version) || !get(in, h.d) || !get(in, h.n))
    fail(ErrorCode::kIo, path + ": truncated header");
  if (version != kVersion)
    fail(ErrorCode::kIo, path + ": unsupported version " + std::to_string(version));
  if (h.d == 0) fail(ErrorCode::kIo, path + ": zero dimension");
  return h;
}

bool parse_csv_line(const std::string& line, std::vector<double>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (end > p && (end[-1] == '\r' || end[-1] == ' ')) --end;
  if (p == end) return false;
  while (p <= end) {
    while (p < end && *p == ' ') ++p;
    double v = 0;
    auto [q, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) fail(ErrorCode::kIo, "csv: cannot parse number in '" + line + "'");
    out.push_back(v);
    p = q;
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    if (*p != ',') fail(ErrorCode::kIo, "csv: expected ',' in '" + line + "'");
    ++p;
  }
  return true;
}

}  // namespace

PointFormat parse_format(const std::string& name) {
  if (name == "bin" || name == "binary") return PointFormat::kBinary;
  if (name == "csv") return PointFormat::kCsv;
  fail(ErrorCode::kInvalidConfig, "unknown point format: " + name);
}

void write_points_binary(const std::string& path, const Eigen::MatrixXd& X,
                         const std::vector<std::uint8_t>* labels) {
  std::ofstream o(path, std::ios::binary);
  if (!o) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  o.write(kMagic, 4);
  put<std::uint32_t>(o, kVersion);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(X.rows()));
  put<std::uint64_t>(o, static_cast<std::uint64_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) put<double>(o, X(i, j));
  if (labels) {
    require(labels->size() == static_cast<std::size_t>(X.cols()), ErrorCode::kInvalidInput,
            "label count differs from point count");
    o.write(reinterpret_cast<const char*>(labels->data()),
            static_cast<std::streamsize>(labels->size()));
  }
  if (!o) fail(ErrorCode::kIo, "write failed: " + path);
}

Eigen::MatrixXd read_points_binary(const std::string& path,
                                   std::vector<std::uint8_t>* labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  BinaryHeader h = read_header(in, path);
  Eigen::MatrixXd X(h.d, static_cast<Eigen::Index>(h.n));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (!get(in, X(i, j))) fail(ErrorCode::kIo, path + ": truncated data");
  if (!X.allFinite()) fail(ErrorCode::kInvalidInput, path + ": non-finite coordinate");
  if (labels) {
    labels->resize(h.n);
    if (!in.read(reinterpret_cast<char*>(labels->data()),
                 static_cast<std::streamsize>(h.n)))
      fail(ErrorCode::kIo, path + ": missing label block");
  }
  return X;
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& X) {
  std::ofstream o(path);
  if (!o) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  char buf[64];
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      auto [e, ec] = std::to_chars(buf, buf + sizeof(buf), X(i, j));
      (void)ec;
      if (i) o << ',';
      o.write(buf, e - buf);
    }
    o << '\n';
  }
  if (!o) fail(ErrorCode::kIo, "write failed: " + path);
}

Eigen::MatrixXd read_points_csv(const std::string& path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<double> all, row;
  std::string line;
  Eigen::Index d = dim;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!parse_csv_line(line, row)) continue;
    if (d == 0) d = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != d)
      fail(ErrorCode::kInvalidInput, path + ": row " + std::to_string(n) + " has " +
                                         std::to_string(row.size()) + " values, expected " +
                                         std::to_string(d));
    all.insert(all.end(), row.begin(), row.end());
    ++n;
  }
  if (d == 0) fail(ErrorCode::kInvalidInput, path + ": empty csv");
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(all.data(), d, static_cast<Eigen::Index>(n));
  if (!X.allFinite()) fail(ErrorCode::kInvalidInput, path + ": non-finite coordinate");
  return X;
}

Eigen::MatrixXd read_points(const std::string& path, PointFormat fmt, Eigen::Index dim) {
  if (fmt == PointFormat::kBinary) {
    Eigen::MatrixXd X = read_points_binary(path);
    if (dim && X.rows() != dim)
      fail(ErrorCode::kInvalidInput, path + ": dimension " + std::to_string(X.rows()) +
                                         " differs from requested " + std::to_string(dim));
    return X;
  }
  return read_points_csv(path, dim);
}

BinaryFileStream::BinaryFileStream(std::ifstream in, std::uint32_t d, std::uint64_t n)
    : SampleStream(d), in_(std::move(in)), n_(n) {}

std::unique_ptr<BinaryFileStream> BinaryFileStream::open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  BinaryHeader h = read_header(in, path);
  return std::unique_ptr<BinaryFileStream>(new BinaryFileStream(std::move(in), h.d, h.n));
}

bool BinaryFileStream::produce(double* out) {
  if (pos_ >= n_) return false;
  for (Eigen::Index i = 0; i < dimension(); ++i)
    if (!get(in_, out[i])) fail(ErrorCode::kIo, "binary stream: truncated data");
  ++pos_;
  return true;
}

CsvFileStream::CsvFileStream(std::ifstream in, Eigen::Index d)
    : SampleStream(d), in_(std::move(in)) {}

std::unique_ptr<CsvFileStream> CsvFileStream::open(const std::string& path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  if (dim <= 0) {
    std::string line;
    std::vector<double> row;
    while (std::getline(in, line))
      if (parse_csv_line(line, row)) break;
    if (row.empty()) fail(ErrorCode::kInvalidInput, path + ": empty csv");
    dim = static_cast<Eigen::Index>(row.size());
    in.clear();
    in.seekg(0);
  }
  return std::unique_ptr<CsvFileStream>(new CsvFileStream(std::move(in), dim));
}

bool CsvFileStream::produce(double* out) {
  std::string line;
  std::vector<double> row;
  while (std::getline(in_, line)) {
    ++line_;
    if (!parse_csv_line(line, row)) continue;
    if (static_cast<Eigen::Index>(row.size()) != dimension())
      fail(ErrorCode::kInvalidInput, "csv line " + std::to_string(line_) + " has " +
                                         std::to_string(row.size()) + " values");
    std::memcpy(out, row.data(), sizeof(double) * row.size());
    return true;
  }
  return false;
}

std::unique_ptr<SampleStream> open_point_stream(const std::string& path, PointFormat fmt,
                                                Eigen::Index dim) {
  if (fmt == PointFormat::kBinary) {
    auto s = BinaryFileStream::open(path);
    if (dim && s->dimension() != dim)
      fail(ErrorCode::kInvalidInput, path + ": dimension " + std::to_string(s->dimension()) +
                                         " differs from requested " + std::to_string(dim));
    return s;
  }
  return CsvFileStream::open(path, dim);
}

FileSource::FileSource(std::string path, PointFormat fmt, Eigen::Index dim)
    : path_(std::move(path)), fmt_(fmt) {
  auto s = open_point_stream(path_, fmt_, dim);
  d_ = s->dimension();
  if (fmt_ == PointFormat::kBinary) {
    n_ = static_cast<BinaryFileStream*>(s.get())->size();
  } else {
    Eigen::VectorXd x(d_);
    while (s->next(x)) ++n_;
  }
}

std::unique_ptr<SampleStream> FileSource::make_pass() {
  return open_point_stream(path_, fmt_, d_);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream o(path);
  if (!o) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  o << text;
  if (!o) fail(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace robustream
