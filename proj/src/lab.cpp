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

#include "robustream/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "robustream/error.hpp"
#include "robustream/linalg.hpp"

namespace robustream {

namespace {

using nlohmann::json;

constexpr std::uint64_t kInlierStream = 10;
constexpr std::uint64_t kAdversaryStream = 11;
constexpr std::int64_t kPilotDraws = 20000;

bool is_regression(InlierKind k) { return k == InlierKind::kLinear || k == InlierKind::kLogistic; }

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Vec unit_dir(const Vec& dir, Eigen::Index d) {
  if (dir.size() == 0) {
    Vec e = Vec::Zero(d);
    e(0) = 1.0;
    return e;
  }
  require(dir.size() == d, ErrorCode::kInvalidConfig, "adversary direction has wrong dimension");
  double nrm = dir.norm();
  require(nrm > 0.0, ErrorCode::kInvalidConfig, "adversary direction is zero");
  return dir / nrm;
}

Vec vec_field(const json& j, const char* key, Eigen::Index d) {
  if (!j.contains(key)) return Vec();
  const json& v = j.at(key);
  if (v.is_number()) return Vec::Constant(d, v.get<double>());
  if (v.is_string() && v.get<std::string>() == "unit")
    return Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  auto s = v.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(s.size()) != d)
    fail(ErrorCode::kInvalidConfig, std::string("scenario field '") + key + "' has length " +
                                        std::to_string(s.size()) + ", expected " +
                                        std::to_string(d));
  return Eigen::Map<Vec>(s.data(), d);
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

const char* adversary_name(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::kNone: return "none";
    case AdversaryKind::kMeanShiftCluster: return "mean_shift_cluster";
    case AdversaryKind::kScaledCluster: return "scaled_cluster";
    case AdversaryKind::kTailSubtractApprox: return "tail_subtract_approx";
    case AdversaryKind::kSignFlipLabels: return "sign_flip_labels";
    case AdversaryKind::kWorkerCollusion: return "worker_collusion";
  }
  return "unknown";
}

const char* inlier_name(InlierKind k) {
  switch (k) {
    case InlierKind::kGaussian: return "gaussian";
    case InlierKind::kStudentT: return "student_t";
    case InlierKind::kRademacher: return "rademacher";
    case InlierKind::kLinear: return "linear";
    case InlierKind::kLogistic: return "logistic";
  }
  return "unknown";
}

std::int64_t Scenario::point_dim() const { return is_regression(inlier.kind) ? d + 1 : d; }

Vec Scenario::true_mean() const {
  if (is_regression(inlier.kind)) return inlier.theta.size() ? inlier.theta : Vec::Zero(d);
  return inlier.mean.size() ? inlier.mean : Vec::Zero(d);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("scenario json: ") + e.what());
  }
  Scenario s;
  try {
    s.d = j.at("d").get<std::int64_t>();
    require(s.d >= 1, ErrorCode::kInvalidConfig, "scenario d must be >= 1");
    s.n = j.value("n", std::uint64_t{0});
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("adversary_seed")) s.adversary_seed = j.at("adversary_seed").get<std::uint64_t>();
    const json ji = j.value("inlier", json::object());
    std::string kind = ji.value("kind", std::string("gaussian"));
    if (kind == "gaussian") s.inlier.kind = InlierKind::kGaussian;
    else if (kind == "student_t") s.inlier.kind = InlierKind::kStudentT;
    else if (kind == "rademacher" || kind == "bounded_cov") s.inlier.kind = InlierKind::kRademacher;
    else if (kind == "linear") s.inlier.kind = InlierKind::kLinear;
    else if (kind == "logistic") s.inlier.kind = InlierKind::kLogistic;
    else fail(ErrorCode::kInvalidConfig, "unknown inlier kind: " + kind);
    s.inlier.mean = vec_field(ji, "mean", s.d);
    s.inlier.cov_diag = vec_field(ji, "cov_diag", s.d);
    if (ji.contains("cov")) {
      auto rows = ji.at("cov").get<std::vector<std::vector<double>>>();
      require(static_cast<std::int64_t>(rows.size()) == s.d, ErrorCode::kInvalidConfig,
              "scenario cov has wrong size");
      s.inlier.cov.resize(s.d, s.d);
      for (std::int64_t r = 0; r < s.d; ++r) {
        require(static_cast<std::int64_t>(rows[r].size()) == s.d, ErrorCode::kInvalidConfig,
                "scenario cov has wrong size");
        for (std::int64_t c = 0; c < s.d; ++c) s.inlier.cov(r, c) = rows[r][c];
      }
    }
    s.inlier.df = ji.value("df", 3.0);
    s.inlier.theta = vec_field(ji, "theta", s.d);
    s.inlier.noise = ji.value("noise", 1.0);
    s.inlier.x_scale = ji.value("x_scale", 1.0);

    const json ja = j.value("adversary", json::object());
    std::string ak = ja.value("kind", std::string("none"));
    if (ak == "none") s.adversary.kind = AdversaryKind::kNone;
    else if (ak == "mean_shift_cluster") s.adversary.kind = AdversaryKind::kMeanShiftCluster;
    else if (ak == "scaled_cluster") s.adversary.kind = AdversaryKind::kScaledCluster;
    else if (ak == "tail_subtract_approx") s.adversary.kind = AdversaryKind::kTailSubtractApprox;
    else if (ak == "sign_flip_labels") s.adversary.kind = AdversaryKind::kSignFlipLabels;
    else if (ak == "worker_collusion") s.adversary.kind = AdversaryKind::kWorkerCollusion;
    else fail(ErrorCode::kInvalidConfig, "unknown adversary kind: " + ak);
    s.adversary.eps = ja.value("eps", 0.0);
    if (ja.contains("magnitude_sqrt_d"))
      s.adversary.magnitude =
          ja.at("magnitude_sqrt_d").get<double>() * std::sqrt(static_cast<double>(s.d));
    else
      s.adversary.magnitude = ja.value("magnitude", 0.0);
    s.adversary.direction = vec_field(ja, "direction", s.d);
    s.adversary.spread = ja.value("spread", 0.1);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("scenario json: ") + e.what());
  }
  if (!(s.adversary.eps >= 0.0 && s.adversary.eps < 0.5))
    fail(ErrorCode::kInvalidConfig, "adversary eps must lie in [0, 1/2)");
  if (s.adversary.kind == AdversaryKind::kSignFlipLabels && !is_regression(s.inlier.kind))
    fail(ErrorCode::kInvalidConfig, "sign_flip_labels needs a regression inlier kind");
  if (s.inlier.kind == InlierKind::kStudentT && !(s.inlier.df > 2.0))
    fail(ErrorCode::kInvalidConfig, "student_t needs df > 2");
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["d"] = s.d;
  j["n"] = s.n;
  j["seed"] = s.seed;
  if (s.adversary_seed) j["adversary_seed"] = *s.adversary_seed;
  json ji;
  ji["kind"] = inlier_name(s.inlier.kind);
  if (s.inlier.mean.size()) ji["mean"] = vec_json(s.inlier.mean);
  if (s.inlier.cov_diag.size()) ji["cov_diag"] = vec_json(s.inlier.cov_diag);
  if (s.inlier.cov.size()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < s.inlier.cov.rows(); ++r)
      rows.push_back(vec_json(s.inlier.cov.row(r).transpose()));
    ji["cov"] = rows;
  }
  ji["df"] = s.inlier.df;
  if (s.inlier.theta.size()) ji["theta"] = vec_json(s.inlier.theta);
  ji["noise"] = s.inlier.noise;
  ji["x_scale"] = s.inlier.x_scale;
  j["inlier"] = ji;
  json ja;
  ja["kind"] = adversary_name(s.adversary.kind);
  ja["eps"] = s.adversary.eps;
  ja["magnitude"] = s.adversary.magnitude;
  if (s.adversary.direction.size()) ja["direction"] = vec_json(s.adversary.direction);
  ja["spread"] = s.adversary.spread;
  j["adversary"] = ja;
  return j.dump();
}

bool LabeledStream::next(double* x, bool* is_inlier, std::uint64_t* serial) {
  bool lab = true;
  if (!produce(x, &lab)) return false;
  for (Eigen::Index i = 0; i < dim_; ++i)
    if (!std::isfinite(x[i])) fail(ErrorCode::kInvalidInput, "generator produced a non-finite point");
  if (is_inlier) *is_inlier = lab;
  if (serial) *serial = serial_;
  ++serial_;
  return true;
}

std::optional<LabeledPoint> LabeledStream::next_point() {
  LabeledPoint p;
  p.point.resize(dim_);
  if (!next(p.point.data(), &p.is_inlier)) return std::nullopt;
  return p;
}

InlierGenerator::InlierGenerator(std::int64_t d, InlierSpec spec, std::uint64_t n, Rng rng)
    : LabeledStream(is_regression(spec.kind) ? d + 1 : d),
      d_(d),
      spec_(std::move(spec)),
      left_(n),
      rng_(std::move(rng)) {
  require(d >= 1, ErrorCode::kInvalidConfig, "inlier dimension must be >= 1");
  if (spec_.mean.size() == 0) spec_.mean = Vec::Zero(d);
  if (spec_.cov_diag.size() == 0) spec_.cov_diag = Vec::Ones(d);
  require(spec_.mean.size() == d && spec_.cov_diag.size() == d, ErrorCode::kInvalidConfig,
          "inlier parameter dimension mismatch");
  require((spec_.cov_diag.array() >= 0.0).all(), ErrorCode::kInvalidConfig,
          "cov_diag must be nonnegative");
  if (spec_.cov.size()) {
    require(spec_.cov.rows() == d && spec_.cov.cols() == d, ErrorCode::kInvalidConfig,
            "inlier cov has wrong size");
    Eigen::LDLT<Mat> ldlt(spec_.cov);
    require(ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= -1e-12).all(),
            ErrorCode::kInvalidConfig, "inlier cov must be PSD");
    Eigen::SelfAdjointEigenSolver<Mat> es(spec_.cov);
    chol_ = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  if (is_regression(spec_.kind)) {
    if (spec_.theta.size() == 0) spec_.theta = Vec::Zero(d);
    require(spec_.theta.size() == d, ErrorCode::kInvalidConfig, "theta has wrong dimension");
  }
}

void InlierGenerator::draw(double* x, Rng& rng) const {
  Eigen::Map<Vec> out(x, dimension());
  switch (spec_.kind) {
    case InlierKind::kGaussian: {
      Vec z(d_);
      for (std::int64_t i = 0; i < d_; ++i) z(i) = rng.normal();
      if (chol_.size()) out = spec_.mean + chol_ * z;
      else out = spec_.mean + spec_.cov_diag.cwiseSqrt().cwiseProduct(z);
      break;
    }
    case InlierKind::kStudentT: {
      std::student_t_distribution<double> t(spec_.df);
      const double s = std::sqrt((spec_.df - 2.0) / spec_.df);
      for (std::int64_t i = 0; i < d_; ++i)
        out(i) = spec_.mean(i) + std::sqrt(spec_.cov_diag(i)) * s * t(rng.engine());
      break;
    }
    case InlierKind::kRademacher:
      for (std::int64_t i = 0; i < d_; ++i)
        out(i) = spec_.mean(i) + std::sqrt(spec_.cov_diag(i)) * rng.rademacher();
      break;
    case InlierKind::kLinear:
    case InlierKind::kLogistic: {
      for (std::int64_t i = 0; i < d_; ++i) out(i) = spec_.x_scale * rng.normal();
      double t = spec_.theta.dot(out.head(d_));
      if (spec_.kind == InlierKind::kLinear) out(d_) = t + spec_.noise * rng.normal();
      else out(d_) = rng.uniform() < sigmoid(t) ? 1.0 : 0.0;
      break;
    }
  }
}

bool InlierGenerator::produce(double* x, bool* is_inlier) {
  if (left_ == 0) return false;
  --left_;
  draw(x, rng_);
  *is_inlier = true;
  return true;
}

std::unique_ptr<InlierGenerator> gen_inliers(std::int64_t d, const InlierSpec& spec,
                                             std::uint64_t n, Rng rng) {
  return std::make_unique<InlierGenerator>(d, spec, n, std::move(rng));
}

TvContaminator::TvContaminator(std::unique_ptr<InlierGenerator> inliers, AdversarySpec adv,
                               Rng adv_rng)
    : LabeledStream(inliers->dimension()),
      in_(std::move(inliers)),
      adv_(std::move(adv)),
      rng_(std::move(adv_rng)) {
  require(adv_.eps >= 0.0 && adv_.eps < 0.5, ErrorCode::kInvalidConfig,
          "adversary eps must lie in [0, 1/2)");
  const Eigen::Index dd = dimension();
  center_ = Vec::Zero(dd);
  if (!is_regression(in_->spec().kind)) center_ = in_->spec().mean;
  if (adv_.kind != AdversaryKind::kSignFlipLabels) dir_ = unit_dir(adv_.direction, dd);
  if (adv_.kind == AdversaryKind::kTailSubtractApprox && adv_.eps > 0.0) {
    Rng pilot(rng_.next_u64(), 99);
    std::vector<double> proj(kPilotDraws);
    Vec x(dd);
    for (std::int64_t i = 0; i < kPilotDraws; ++i) {
      in_->draw(x.data(), pilot);
      proj[static_cast<std::size_t>(i)] = dir_.dot(x);
    }
    std::sort(proj.begin(), proj.end());
    std::size_t q = static_cast<std::size_t>(std::floor((1.0 - adv_.eps) * kPilotDraws));
    tail_cut_ = proj[std::min(q, proj.size() - 1)];
  }
}

void TvContaminator::draw_outlier(double* x) {
  const Eigen::Index dd = dimension();
  Eigen::Map<Vec> out(x, dd);
  switch (adv_.kind) {
    case AdversaryKind::kNone:
    case AdversaryKind::kTailSubtractApprox:
      in_->draw(x, rng_);
      break;
    case AdversaryKind::kMeanShiftCluster:
      in_->draw(x, rng_);
      out += adv_.magnitude * dir_;
      break;
    case AdversaryKind::kScaledCluster: {
      for (Eigen::Index i = 0; i < dd; ++i) out(i) = adv_.spread * rng_.normal();
      out += center_ + adv_.magnitude * dir_;
      break;
    }
    case AdversaryKind::kWorkerCollusion:
      out = center_ + adv_.magnitude * dir_;
      break;
    case AdversaryKind::kSignFlipLabels: {
      in_->draw(x, rng_);
      const Eigen::Index d = dd - 1;
      const double scale = adv_.magnitude > 0.0 ? adv_.magnitude : 1.0;
      out.head(d) *= scale;
      const bool logistic = out(d) == 0.0 || out(d) == 1.0;
      out(d) = logistic ? 1.0 - out(d) : -out(d);
      break;
    }
  }
}

bool TvContaminator::produce(double* x, bool* is_inlier) {
  Vec tmp(dimension());
  if (adv_.kind == AdversaryKind::kTailSubtractApprox && adv_.eps > 0.0) {
    if (!in_->next(x, nullptr)) return false;
    Eigen::Map<Vec> out(x, dimension());
    while (dir_.dot(out) > tail_cut_) in_->draw(x, rng_);
    *is_inlier = true;
    return true;
  }
  const bool outlier = adv_.eps > 0.0 && rng_.uniform() < adv_.eps;
  if (!in_->next(outlier ? tmp.data() : x, nullptr)) return false;
  if (outlier) draw_outlier(x);
  *is_inlier = !outlier;
  return true;
}

std::unique_ptr<TvContaminator> contaminate_tv(std::unique_ptr<InlierGenerator> inliers,
                                               const AdversarySpec& adv, Rng adv_rng) {
  return std::make_unique<TvContaminator>(std::move(inliers), adv, std::move(adv_rng));
}

std::unique_ptr<LabeledStream> open_scenario(const Scenario& s, std::uint64_t seed_offset) {
  const std::uint64_t seed = s.seed + seed_offset;
  const std::uint64_t aseed = (s.adversary_seed ? *s.adversary_seed : s.seed) + seed_offset;
  AdversarySpec adv = s.adversary;
  if (adv.kind != AdversaryKind::kSignFlipLabels) {
    adv.direction = unit_dir(adv.direction, s.d);
    if (s.inlier.kind == InlierKind::kLinear || s.inlier.kind == InlierKind::kLogistic) {
      Vec full = Vec::Zero(s.d + 1);
      full.head(s.d) = adv.direction;
      adv.direction = full;
    }
  }
  auto in = gen_inliers(s.d, s.inlier, s.n, seeded_rng(seed, kInlierStream));
  return contaminate_tv(std::move(in), adv, seeded_rng(aseed, kAdversaryStream));
}

std::unique_ptr<LabeledStream> open_scenario(const Scenario& s) { return open_scenario(s, 0); }

LabeledDataset drain(LabeledStream& s, std::uint64_t n) {
  LabeledDataset out;
  out.X.resize(s.dimension(), static_cast<Eigen::Index>(n));
  out.labels.resize(n);
  std::uint64_t i = 0;
  bool lab = true;
  for (; i < n; ++i) {
    if (!s.next(out.X.col(static_cast<Eigen::Index>(i)).data(), &lab)) break;
    out.labels[i] = lab ? 1 : 0;
  }
  out.X.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(i));
  out.labels.resize(i);
  return out;
}

LabeledDataset generate(const Scenario& s) {
  auto st = open_scenario(s);
  return drain(*st, s.n);
}

LabeledDataset contaminate_strong(const LabeledDataset& data, const Scenario& s, Rng& rng) {
  LabeledDataset out = data;
  const Eigen::Index n = data.X.cols();
  const std::int64_t m = static_cast<std::int64_t>(std::floor(s.adversary.eps * static_cast<double>(n)));
  if (m == 0) return out;
  Scenario outl = s;
  outl.adversary_seed = rng.next_u64();
  auto adv_stream = open_scenario(outl);
  auto* tv = static_cast<TvContaminator*>(adv_stream.get());
  Vec dir = unit_dir(s.adversary.direction, s.d);
  std::vector<std::pair<double, Eigen::Index>> proj;
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.labels[static_cast<std::size_t>(i)])
      proj.emplace_back(dir.dot(data.X.col(i).head(s.d)), i);
  std::sort(proj.begin(), proj.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  require(static_cast<std::int64_t>(proj.size()) >= m, ErrorCode::kInvalidInput,
          "contaminate_strong: fewer inliers than replacements");
  for (std::int64_t k = 0; k < m; ++k) {
    Eigen::Index i = proj[static_cast<std::size_t>(k)].second;
    Vec x(data.X.rows());
    tv->draw_outlier(x.data());
    out.X.col(i) = x;
    out.labels[static_cast<std::size_t>(i)] = 0;
  }
  return out;
}

UnlabeledView::UnlabeledView(LabeledStream& inner)
    : SampleStream(inner.dimension()), inner_(inner) {}

bool UnlabeledView::produce(double* out) {
  bool lab = true;
  std::uint64_t serial = 0;
  if (!inner_.next(out, &lab, &serial)) return false;
  if (any_ && serial != last_serial_ + 1) consecutive_ = false;
  if (!any_ && serial != 0) consecutive_ = false;
  any_ = true;
  last_serial_ = serial;
  return true;
}

StabilityReport stability_check(const Mat& X, double eps, double delta, const Vec& mu,
                                int trials, Rng& rng) {
  const Eigen::Index d = X.rows(), n = X.cols();
  require(n > 0 && mu.size() == d, ErrorCode::kInvalidInput, "stability_check: bad input");
  require(eps > 0.0 && eps < 1.0 && delta > 0.0, ErrorCode::kInvalidInput,
          "stability_check: need eps in (0,1), delta > 0");
  Mat Y = X.colwise() - mu;
  StabilityReport rep;
  const double mass_removed = eps * static_cast<double>(n);
  auto evaluate = [&](const Vec& w) {
    const double ws = w.sum();
    if (ws <= 0.0) return;
    Vec shift = Y * w / ws;
    Mat cov = (Y * w.asDiagonal() * Y.transpose()) / ws - Mat::Identity(d, d);
    Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
    double dev = es.eigenvalues().cwiseAbs().maxCoeff();
    rep.max_mean_shift = std::max(rep.max_mean_shift, shift.norm());
    rep.max_cov_deviation = std::max(rep.max_cov_deviation, dev);
  };
  auto trim_along = [&](const Vec& v) {
    Vec proj = v.transpose() * Y;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return proj(a) > proj(b);
    });
    Vec w = Vec::Ones(n);
    double left = mass_removed;
    for (Eigen::Index i : idx) {
      if (left <= 0.0) break;
      double take = std::min(1.0, left);
      w(i) -= take;
      left -= take;
    }
    return w;
  };
  {
    Mat second = Y * Y.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Mat> es(second);
    Vec top = es.eigenvectors().col(d - 1);
    evaluate(trim_along(top));
    evaluate(trim_along(-top));
    rep.trials += 2;
  }
  const std::int64_t keep =
      static_cast<std::int64_t>(std::ceil((1.0 - eps) * static_cast<double>(n)));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (int t = 0; t < trials; ++t) {
    Vec w;
    switch (t % 3) {
      case 0: {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        w = Vec::Zero(n);
        for (std::int64_t i = 0; i < keep; ++i) w(perm[static_cast<std::size_t>(i)]) = 1.0;
        break;
      }
      case 1: {
        w.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = 1.0 - 2.0 * eps * rng.uniform();
        break;
      }
      default:
        w = trim_along(rng.unit_vector(d));
        break;
    }
    evaluate(w);
    ++rep.trials;
  }
  rep.mean_violation = rep.max_mean_shift > delta;
  rep.cov_violation = rep.max_cov_deviation > delta * delta / eps;
  return rep;
}

double l2_error(const Vec& estimate, const Vec& truth) {
  require(estimate.size() == truth.size(), ErrorCode::kInvalidInput, "l2_error: size mismatch");
  return (estimate - truth).norm();
}

double frobenius_error(const Mat& estimate, const Mat& truth) {
  require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(),
          ErrorCode::kInvalidInput, "frobenius_error: size mismatch");
  return (estimate - truth).norm();
}

ExperimentReport metrics(const Vec& estimate, const Vec& truth, const EstimateResult& run) {
  ExperimentReport r;
  r.d = estimate.size();
  r.l2_error = l2_error(estimate, truth);
  r.iters = run.iterations;
  r.samples_used = run.samples_used;
  r.certified = run.status == RunStatus::kCertified;
  r.eps = run.config.eps;
  r.seed = run.config.seed;
  return r;
}

std::vector<RoundAudit> audit_rounds(const LabeledDataset& data, const FilterHistory& h) {
  const Eigen::Index n = data.X.cols();
  require(n > 0 && static_cast<Eigen::Index>(data.labels.size()) == n, ErrorCode::kInvalidInput,
          "audit: labels and points differ in count");
  Vec lw(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lw(i) = (data.X.col(i) - h.init_center).norm() <= h.init_radius
                ? 0.0
                : -std::numeric_limits<double>::infinity();
  double n_in = 0.0;
  for (auto l : data.labels) n_in += l ? 1.0 : 0.0;
  std::vector<RoundAudit> out;
  const Eigen::Index chunk = 512;
  Vec g(chunk), tau(chunk);
  for (const FilterRound& rd : h.rounds) {
    RoundAudit a;
    KahanSum sin, sout, sz2, mass;
    for (Eigen::Index s = 0; s < n; s += chunk) {
      const Eigen::Index c = std::min(chunk, n - s);
      score_eval_block(rd, data.X.middleCols(s, c), g.head(c), tau.head(c));
      for (Eigen::Index i = 0; i < c; ++i) {
        const Eigen::Index k = s + i;
        double before = std::isinf(lw(k)) ? 0.0 : std::exp(lw(k));
        lw(k) += log_round_factor(tau(i), rd.r_bound, rd.exponent);
        double after = std::isinf(lw(k)) ? 0.0 : std::exp(lw(k));
        double dw = before - after;
        bool inl = data.labels[static_cast<std::size_t>(k)] != 0;
        if (inl) {
          sin.add(dw);
          mass.add(after);
        } else {
          sout.add(dw);
        }
        sz2.add(dw * dw);
      }
    }
    const double nd = static_cast<double>(n);
    a.inlier_removed = sin.value() / nd;
    a.outlier_removed = sout.value() / nd;
    double mean_z = a.outlier_removed - a.inlier_removed;
    double var = std::max(0.0, sz2.value() / nd - mean_z * mean_z);
    a.sigma = std::sqrt(var / nd);
    a.inlier_mass_after = n_in > 0.0 ? mass.value() / n_in : 0.0;
    out.push_back(a);
  }
  return out;
}

}  // namespace robustream
