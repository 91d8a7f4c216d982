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

#include "robustream/robustream.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "robustream/applications.hpp"
#include "robustream/batch_filter.hpp"
#include "robustream/error.hpp"
#include "robustream/harness.hpp"
#include "robustream/io.hpp"
#include "robustream/lab.hpp"
#include "robustream/ledger.hpp"
#include "robustream/streaming.hpp"

using namespace robustream;

struct rs_config {
  EstimatorConfig cfg;
};

struct rs_stream {
  Mat owned;                              // buffer streams
  std::unique_ptr<LabeledStream> labeled;  // scenario streams
  std::unique_ptr<SampleStream> stream;
};

struct rs_scenario {
  Scenario s;
};

struct rs_result {
  EstimateResult r;
  std::uint64_t peak = 0;
};

namespace {

thread_local std::string g_last_error;

rs_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidInput: return RS_INVALID_INPUT;
    case ErrorCode::kInvalidConfig: return RS_INVALID_CONFIG;
    case ErrorCode::kStreamExhausted: return RS_STREAM_EXHAUSTED;
    case ErrorCode::kPruneFailed: return RS_PRUNE_FAILED;
    case ErrorCode::kFilterStuck: return RS_FILTER_STUCK;
    case ErrorCode::kNumericalFailure: return RS_NUMERICAL_FAILURE;
    case ErrorCode::kIo: return RS_IO;
  }
  return RS_INTERNAL;
}

template <class F>
rs_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RS_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kInvalidInput, std::string(what) + " is null");
}

Mat from_row_major(const double* data, std::uint64_t n, std::int64_t d) {
  need(data, "data");
  require(d > 0 && n > 0, ErrorCode::kInvalidInput, "need n > 0 and d > 0");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>>(
      data, d, static_cast<Eigen::Index>(n));
}

EstimatorConfig config_or_default(const rs_config* c) { return c ? c->cfg : EstimatorConfig{}; }

}  // namespace

extern "C" {

const char* rs_version(void) { return "1.0.0"; }
const char* rs_last_error(void) { return g_last_error.c_str(); }

const char* rs_status_name(rs_status s) {
  switch (s) {
    case RS_OK: return "ok";
    case RS_INVALID_INPUT: return "invalid_input";
    case RS_INVALID_CONFIG: return "invalid_config";
    case RS_STREAM_EXHAUSTED: return "stream_exhausted";
    case RS_PRUNE_FAILED: return "prune_failed";
    case RS_FILTER_STUCK: return "filter_stuck";
    case RS_NUMERICAL_FAILURE: return "numerical_failure";
    case RS_IO: return "io";
    case RS_INTERNAL: return "internal";
  }
  return "unknown";
}

void rs_string_free(char* s) { std::free(s); }

rs_status rs_config_new(rs_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rs_config{};
  });
}

rs_status rs_config_from_json(const char* json, rs_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    auto c = std::make_unique<rs_config>();
    c->cfg = config_from_json(json);
    *out = c.release();
  });
}

rs_status rs_config_set(rs_config* c, const char* key, double value) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    auto j = nlohmann::json::parse(config_to_json(c->cfg));
    if (!j.contains(key)) fail(ErrorCode::kInvalidConfig, std::string("unknown config key: ") + key);
    auto& slot = j[key];
    if (slot.is_boolean()) slot = value != 0.0;
    else if (slot.is_number_unsigned()) {
      require(value >= 0.0, ErrorCode::kInvalidConfig, "value must be nonnegative");
      slot = static_cast<std::uint64_t>(value);
    } else if (slot.is_number_integer()) slot = static_cast<std::int64_t>(value);
    else slot = value;
    c->cfg = config_from_json(j.dump());
  });
}

rs_status rs_config_get(const rs_config* c, const char* key, double* value) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    auto j = nlohmann::json::parse(config_to_json(c->cfg));
    if (!j.contains(key)) fail(ErrorCode::kInvalidConfig, std::string("unknown config key: ") + key);
    const auto& slot = j[key];
    *value = slot.is_boolean() ? (slot.get<bool>() ? 1.0 : 0.0) : slot.get<double>();
  });
}

rs_status rs_config_to_json(const rs_config* c, char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = dup_string(config_to_json(c->cfg));
  });
}

void rs_config_free(rs_config* c) { delete c; }

rs_status rs_stream_open_file(const char* path, const char* format, int64_t dim, rs_stream** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto s = std::make_unique<rs_stream>();
    s->stream = open_point_stream(path, parse_format(format ? format : "bin"), dim);
    *out = s.release();
  });
}

rs_status rs_stream_from_buffer(const double* data, uint64_t n, int64_t d, rs_stream** out) {
  return guarded([&] {
    need(out, "out");
    auto s = std::make_unique<rs_stream>();
    s->owned = from_row_major(data, n, d);
    s->stream = std::make_unique<MatrixStream>(s->owned);
    *out = s.release();
  });
}

rs_status rs_stream_open_scenario(const rs_scenario* sc, rs_stream** out) {
  return guarded([&] {
    need(sc, "scenario");
    need(out, "out");
    auto s = std::make_unique<rs_stream>();
    s->labeled = open_scenario(sc->s);
    s->stream = std::make_unique<UnlabeledView>(*s->labeled);
    *out = s.release();
  });
}

int64_t rs_stream_dim(const rs_stream* s) { return s ? s->stream->dimension() : 0; }
uint64_t rs_stream_consumed(const rs_stream* s) { return s ? s->stream->consumed() : 0; }

void rs_stream_free(rs_stream* s) {
  if (!s) return;
  s->stream.reset();
  s->labeled.reset();
  delete s;
}

rs_status rs_scenario_from_json(const char* json, rs_scenario** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    auto s = std::make_unique<rs_scenario>();
    s->s = scenario_from_json(json);
    *out = s.release();
  });
}

int64_t rs_scenario_point_dim(const rs_scenario* s) { return s ? s->s.point_dim() : 0; }
uint64_t rs_scenario_size(const rs_scenario* s) { return s ? s->s.n : 0; }

rs_status rs_scenario_generate(const rs_scenario* s, const char* path, const char* format,
                               int labeled) {
  return guarded([&] {
    need(s, "scenario");
    need(path, "path");
    require(s->s.n > 0, ErrorCode::kInvalidConfig, "scenario n must be positive");
    LabeledDataset data = generate(s->s);
    if (parse_format(format ? format : "bin") == PointFormat::kCsv) {
      require(!labeled, ErrorCode::kInvalidConfig, "labels are only written in binary format");
      write_points_csv(path, data.X);
    } else {
      write_points_binary(path, data.X, labeled ? &data.labels : nullptr);
    }
  });
}

rs_status rs_scenario_true_mean(const rs_scenario* s, double* out, int64_t cap) {
  return guarded([&] {
    need(s, "scenario");
    need(out, "out");
    Vec m = s->s.true_mean();
    require(cap >= m.size(), ErrorCode::kInvalidInput, "output buffer too small");
    std::memcpy(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  });
}

void rs_scenario_free(rs_scenario* s) { delete s; }

rs_status rs_estimate_streaming(rs_stream* s, const rs_config* c, rs_result** out) {
  return guarded([&] {
    need(s, "stream");
    need(out, "out");
    auto r = std::make_unique<rs_result>();
    MemoryLedger ledger;
    EstimatorConfig cfg = config_or_default(c);
    r->r = robust_mean_streaming(*s->stream, cfg, &ledger);
    r->peak = ledger.peak();
    *out = r.release();
  });
}

rs_status rs_estimate_batch(const double* data, uint64_t n, int64_t d, const rs_config* c,
                            rs_result** out) {
  return guarded([&] {
    need(out, "out");
    Mat X = from_row_major(data, n, d);
    auto r = std::make_unique<rs_result>();
    MemoryLedger ledger;
    {
      LedgerScope scope(&ledger);
      r->r = robust_mean_batch(X, config_or_default(c));
    }
    r->peak = ledger.peak();
    *out = r.release();
  });
}

rs_status rs_estimate_file(const char* path, const char* format, int64_t dim, const char* mode,
                           const rs_config* c, rs_result** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string m = mode ? mode : "streaming";
    const PointFormat fmt = parse_format(format ? format : "bin");
    EstimatorConfig cfg = config_or_default(c);
    auto r = std::make_unique<rs_result>();
    MemoryLedger ledger;
    if (m == "streaming") {
      if (cfg.budget == 0) cfg.budget = FileSource(path, fmt, dim).size();
      auto s = open_point_stream(path, fmt, dim);
      r->r = robust_mean_streaming(*s, cfg, &ledger);
    } else if (m == "batch") {
      Mat X = read_points(path, fmt, dim);
      LedgerScope scope(&ledger);
      r->r = robust_mean_batch(X, cfg);
    } else if (m == "multipass") {
      FileSource src(path, fmt, dim);
      r->r = robust_mean_multipass(src, cfg, &ledger);
    } else {
      fail(ErrorCode::kInvalidConfig, "unknown mode: " + m);
    }
    r->peak = ledger.peak();
    *out = r.release();
  });
}

rs_status rs_estimate_covariance(rs_stream* s, const rs_config* c, rs_result** out) {
  return guarded([&] {
    need(s, "stream");
    need(out, "out");
    auto r = std::make_unique<rs_result>();
    MemoryLedger ledger;
    Mat S;
    {
      LedgerScope scope(&ledger);
      S = robust_covariance_bounded(*s->stream, config_or_default(c), {}, &r->r);
    }
    r->r.mu = Eigen::Map<const Vec>(S.data(), S.size());
    r->peak = ledger.peak();
    *out = r.release();
  });
}

rs_status rs_byzantine_aggregate(const double* workers, uint64_t m, int64_t d, double eps,
                                 const rs_config* c, double* out) {
  return guarded([&] {
    need(out, "out");
    Mat W = from_row_major(workers, m, d);
    Vec g = byzantine_aggregate(W, eps, config_or_default(c));
    std::memcpy(out, g.data(), sizeof(double) * static_cast<std::size_t>(d));
  });
}

int64_t rs_result_dim(const rs_result* r) { return r ? r->r.mu.size() : 0; }

rs_status rs_result_mu(const rs_result* r, double* out, int64_t cap) {
  return guarded([&] {
    need(r, "result");
    need(out, "out");
    require(cap >= r->r.mu.size(), ErrorCode::kInvalidInput, "output buffer too small");
    std::memcpy(out, r->r.mu.data(), sizeof(double) * static_cast<std::size_t>(r->r.mu.size()));
  });
}

rs_run_status rs_result_status(const rs_result* r) {
  if (!r) return RS_RUN_NOT_CERTIFIED;
  return static_cast<rs_run_status>(static_cast<int>(r->r.status));
}

int rs_result_iterations(const rs_result* r) { return r ? r->r.iterations : 0; }
uint64_t rs_result_samples_used(const rs_result* r) { return r ? r->r.samples_used : 0; }
uint64_t rs_result_passes(const rs_result* r) { return r ? r->r.passes : 0; }
uint64_t rs_result_peak_mem_floats(const rs_result* r) { return r ? r->peak : 0; }

rs_status rs_result_to_json(const rs_result* r, char** out) {
  return guarded([&] {
    need(r, "result");
    need(out, "out");
    auto j = nlohmann::json::parse(trace_to_json(r->r));
    j["peak_mem_floats"] = r->peak;
    j["config"] = nlohmann::json::parse(config_to_json(r->r.config));
    j["history"] = nlohmann::json::parse(history_to_json(r->r.history));
    *out = dup_string(j.dump(2));
  });
}

void rs_result_free(rs_result* r) { delete r; }

rs_status rs_report_header(char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup_string(report_header());
  });
}

rs_status rs_run_spec(const char* spec_json, int no_timing, char** rows_out) {
  return guarded([&] {
    need(spec_json, "spec");
    RunSpec spec = runspec_from_json(spec_json);
    if (no_timing) spec.timing = false;
    std::string rows;
    for (const auto& r : run(spec)) rows += report_row(r);
    if (rows_out) *rows_out = dup_string(rows);
  });
}

rs_status rs_sweep(const char* template_json, const char* grid_json, const char* out_path,
                   int no_timing, uint64_t* rows_written) {
  return guarded([&] {
    need(template_json, "template");
    need(grid_json, "grid");
    need(out_path, "out_path");
    std::string tmpl = template_json;
    if (no_timing) {
      auto j = nlohmann::json::parse(tmpl);
      j["timing"] = false;
      tmpl = j.dump();
    }
    auto rows = sweep(tmpl, grid_from_json(grid_json), out_path);
    if (rows_written) *rows_written = rows.size();
  });
}

}  // extern "C"
