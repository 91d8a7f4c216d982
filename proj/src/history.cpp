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

#include "robustream/history.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "robustream/error.hpp"

namespace robustream {

Sketch::Sketch(Mat rows)
    : rows_(std::move(rows)),
      frob_sq_(rows_.squaredNorm()),
      mem_(MemTag::kHistory, static_cast<std::size_t>(rows_.size())) {}

FilterRound::FilterRound(Point c, Sketch s, double thr, std::int64_t ell, double r)
    : center(std::move(c)),
      sketch(std::move(s)),
      threshold(thr),
      exponent(ell),
      r_bound(r),
      mem(MemTag::kHistory, static_cast<std::size_t>(center.size()) + 4) {
  require(sketch.dim() == center.size(), ErrorCode::kInvalidInput,
          "sketch and center dimensions differ");
  require(threshold >= 0.0 && ell >= 0 && r > 0.0, ErrorCode::kInvalidInput,
          "invalid filter round parameters");
}

FilterHistory::FilterHistory(Point center, double radius)
    : init_center(std::move(center)),
      init_radius(radius),
      mem(MemTag::kHistory, static_cast<std::size_t>(init_center.size()) + 1) {}

Score score_eval(const FilterRound& round, const Eigen::Ref<const Vec>& x) {
  require(x.size() == round.center.size(), ErrorCode::kInvalidInput,
          "score_eval: dimension mismatch");
  double g = (round.sketch.rows() * (x - round.center)).squaredNorm();
  return {g, g > round.threshold ? g : 0.0};
}

double log_round_factor(double tau_tilde, double r, std::int64_t ell) {
  if (ell == 0 || tau_tilde <= 0.0) return 0.0;
  if (tau_tilde >= r) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(ell) * std::log1p(-tau_tilde / r);
}

double weight_eval(const FilterHistory& h, const Eigen::Ref<const Vec>& x,
                   std::size_t upto) {
  require(x.size() == h.init_center.size(), ErrorCode::kInvalidInput,
          "weight_eval: dimension mismatch");
  if ((x - h.init_center).norm() > h.init_radius) return 0.0;
  std::size_t n = std::min(upto, h.rounds.size());
  double lw = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const FilterRound& rd = h.rounds[s];
    Score sc = score_eval(rd, x);
    lw += log_round_factor(sc.tau_tilde, rd.r_bound, rd.exponent);
    if (std::isinf(lw)) return 0.0;
  }
  return std::exp(lw);
}

void score_eval_block(const FilterRound& round, const Eigen::Ref<const Mat>& X,
                      Eigen::Ref<Vec> g_tilde, Eigen::Ref<Vec> tau_tilde) {
  require(X.rows() == round.center.size(), ErrorCode::kInvalidInput,
          "score_eval: dimension mismatch");
  MemToken scratch(MemTag::kScratch, static_cast<std::size_t>(
                                         (round.sketch.num_rows() + X.rows()) * X.cols()));
  Mat Y = X.colwise() - round.center;
  Mat G = round.sketch.rows() * Y;
  g_tilde = G.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    tau_tilde(i) = g_tilde(i) > round.threshold ? g_tilde(i) : 0.0;
}

void weight_eval_block(const FilterHistory& h, const Eigen::Ref<const Mat>& X,
                       Eigen::Ref<Vec> w, std::size_t upto) {
  require(X.rows() == h.init_center.size(), ErrorCode::kInvalidInput,
          "weight_eval: dimension mismatch");
  const Eigen::Index c = X.cols();
  Vec lw = Vec::Zero(c);
  for (Eigen::Index i = 0; i < c; ++i)
    if ((X.col(i) - h.init_center).norm() > h.init_radius)
      lw(i) = -std::numeric_limits<double>::infinity();
  std::size_t n = std::min(upto, h.rounds.size());
  MemToken scratch(MemTag::kScratch, static_cast<std::size_t>(2 * c));
  Vec g(c), tau(c);
  for (std::size_t s = 0; s < n; ++s) {
    const FilterRound& rd = h.rounds[s];
    score_eval_block(rd, X, g, tau);
    for (Eigen::Index i = 0; i < c; ++i)
      lw(i) += log_round_factor(tau(i), rd.r_bound, rd.exponent);
  }
  for (Eigen::Index i = 0; i < c; ++i)
    w(i) = std::isinf(lw(i)) ? 0.0 : std::exp(lw(i));
}

namespace {

using nlohmann::json;

json vec_json(const Vec& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec json_vec(const json& j) {
  auto s = j.get<std::vector<double>>();
  return Eigen::Map<Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

double json_real(const json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    fail(ErrorCode::kInvalidInput, "history json: bad real " + s);
  }
  return j.get<double>();
}

json real_json(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

}  // namespace

std::string history_to_json(const FilterHistory& h) {
  json j;
  j["schema"] = "robustream-history/1";
  j["dim"] = h.dim();
  j["init_center"] = vec_json(h.init_center);
  j["init_radius"] = real_json(h.init_radius);
  json rounds = json::array();
  for (const auto& r : h.rounds) {
    json jr;
    jr["center"] = vec_json(r.center);
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.sketch.num_rows(); ++i)
      rows.push_back(vec_json(r.sketch.rows().row(i).transpose()));
    jr["sketch"] = rows;
    jr["threshold"] = r.threshold;
    jr["exponent"] = r.exponent;
    jr["r_bound"] = r.r_bound;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;
  return j.dump();
}

FilterHistory history_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("history json: ") + e.what());
  }
  try {
    FilterHistory h(json_vec(j.at("init_center")), json_real(j.at("init_radius")));
    for (const auto& jr : j.at("rounds")) {
      const auto& rows = jr.at("sketch");
      Mat U(static_cast<Eigen::Index>(rows.size()), h.dim());
      for (std::size_t i = 0; i < rows.size(); ++i)
        U.row(static_cast<Eigen::Index>(i)) = json_vec(rows[i]).transpose();
      h.rounds.emplace_back(json_vec(jr.at("center")), Sketch(std::move(U)),
                            jr.at("threshold").get<double>(),
                            jr.at("exponent").get<std::int64_t>(),
                            jr.at("r_bound").get<double>());
    }
    return h;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("history json: ") + e.what());
  }
}

}  // namespace robustream
