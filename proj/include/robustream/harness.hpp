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
#include <string>
#include <vector>

#include "robustream/applications.hpp"
#include "robustream/config.hpp"
#include "robustream/lab.hpp"

namespace robustream {

enum class EstimatorKind {
  kStreaming,
  kBatch,
  kMultipass,
  kCovariance,
  kLinreg,
  kLogreg,
  kLepski,  // streaming estimator with unknown scale, wrapped in Lepski search
};

const char* estimator_name(EstimatorKind k);
EstimatorKind parse_estimator(const std::string& name);

struct RunSpec {
  Scenario scenario;
  EstimatorKind estimator = EstimatorKind::kStreaming;
  EstimatorConfig config;
  std::vector<std::string> baselines;  // sample_mean, coordinate_median, trimmed_mean
  std::string output;                  // CSV path; empty = none
  bool timing = true;                  // false writes wall_ms = 0
  // Regression and Lepski settings.
  std::int64_t gd_steps = 5;
  double step_eta = 0.0;
  double theta_radius = 2.0;
  double tau_l = 1.0;
  double tau_u = 1.0;
  double sigma = 0.0;  // known gradient scale; 0 = Lepski
  LepskiOptions lepski;
};

RunSpec runspec_from_json(const std::string& text);
std::string runspec_to_json(const RunSpec& spec);

// Stable 16-hex-digit key of a spec (FNV-1a over its canonical JSON).
std::string run_key(const RunSpec& spec);

// Baselines.
Vec sample_mean(const Mat& X);
Vec coordinate_median(const Mat& X);
// Per coordinate: drops the ceil(eps n) smallest and largest values.
Vec trimmed_mean(const Mat& X, double eps);

// Estimator row followed by one row per baseline. Estimator failures become
// rows with a non-empty failure field.
std::vector<ExperimentReport> run(const RunSpec& spec);

extern const char* const kReportSchema;  // "# schema: robustream-report/1"
std::string report_header();             // schema line + column line
std::string report_row(const ExperimentReport& r);
// Appends rows, writing the header first if the file is new or empty.
void append_report(const std::string& path, const std::vector<ExperimentReport>& rows);

struct SweepGrid {
  std::vector<double> eps;
  std::vector<std::int64_t> d;
  std::vector<std::uint64_t> n;
  std::vector<std::uint64_t> seed;
};

SweepGrid grid_from_json(const std::string& text);

// Cell spec: the template JSON with eps (scenario and config), d, n
// (scenario size and streaming budget) and seed (scenario and config)
// overridden where the axis value is given.
RunSpec sweep_cell(const std::string& template_json, const double* eps, const std::int64_t* d,
                   const std::uint64_t* n, const std::uint64_t* seed);

// Cartesian product over the grid; empty axes keep the template value.
// Cells whose key already appears in `out` are skipped. Returns the rows
// written by this call.
std::vector<ExperimentReport> sweep(const std::string& template_json, const SweepGrid& grid,
                                    const std::string& out);

}  // namespace robustream
