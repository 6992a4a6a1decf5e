// Copyright 2026 The Cascade Reward Authors
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

#include "cascade/calibrator/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <stdexcept>
#include <thread>

#include "cascade/io/digest.hpp"
#include "cascade/io/errors.hpp"
#include "cascade/io/jsonl.hpp"
#include "cascade/kernels/kernels.hpp"

namespace cascade::calibrator {

using nlohmann::ordered_json;

namespace {

Score score_field(const ordered_json& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_number()) {
    throw std::invalid_argument(std::string("missing numeric field \"") + key + "\"");
  }
  return Score::of(it->get<double>());
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " grid value outside [0, 1]");
    }
    if (i && !(v[i] > v[i - 1])) {
      throw std::invalid_argument(std::string(name) + " grid is not strictly increasing");
    }
  }
}

std::vector<double> axis(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("grid step must lie in (0, 1]");
  std::vector<double> out;
  const double m = std::round(1.0 / step);
  if (std::fabs(m * step - 1.0) < 1e-9) {
    // k / m is the correctly rounded grid value; k * step accumulates error.
    for (int k = 0; k <= static_cast<int>(m); ++k) out.push_back(k / m);
  } else {
    for (int k = 0; k * step <= 1.0 + 1e-12; ++k) out.push_back(std::min(1.0, k * step));
  }
  return out;
}

double half_gap(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double g = 1.0;
  for (std::size_t i = 1; i < v.size(); ++i) g = std::min(g, v[i] - v[i - 1]);
  return 0.5 * g;
}

// Fused-reward evaluator over a fixed fit set; teacher ranks computed once.
class Evaluator {
 public:
  explicit Evaluator(std::span<const EvalInstance> data) {
    s_r_.reserve(data.size());
    s_j_.reserve(data.size());
    std::vector<double> y;
    y.reserve(data.size());
    for (const auto& e : data) {
      s_r_.push_back(e.s_r.value());
      s_j_.push_back(e.s_j.value());
      y.push_back(e.teacher_y.value());
    }
    teacher_ranks_ = average_ranks(y);
  }

  std::size_t size() const { return s_r_.size(); }

  Correlation eval(const kernels::FuseParams& p, std::vector<double>& fused) const {
    if (size() < 2) return {0.0, true};
    fused.resize(size());
    kernels::fuse(s_r_, s_j_, p, fused);
    const auto ranks = average_ranks(fused);
    return pearson(ranks, teacher_ranks_);
  }

 private:
  std::vector<double> s_r_;
  std::vector<double> s_j_;
  std::vector<double> teacher_ranks_;
};

kernels::FuseParams to_fuse(const CascadeParams& p) { return {p.tau_a(), p.tau_b(), p.w1(), p.w2()}; }

CascadeParams from_fuse(const kernels::FuseParams& f) { return CascadeParams(f.tau_a, f.tau_b, f.w1, f.w2); }

bool preferred_raw(double ra, const kernels::FuseParams& a, double rb, const kernels::FuseParams& b) {
  if (ra > rb + kRhoTieTolerance) return true;
  if (rb > ra + kRhoTieTolerance) return false;
  const double wa = a.tau_b - a.tau_a, wb = b.tau_b - b.tau_a;
  if (wa != wb) return wa > wb;
  if (a.tau_a != b.tau_a) return a.tau_a < b.tau_a;
  if (a.tau_b != b.tau_b) return a.tau_b < b.tau_b;
  if (a.w1 != b.w1) return a.w1 < b.w1;
  return a.w2 < b.w2;
}

// Evaluates every point, in parallel, into a vector indexed like `points`.
std::vector<Correlation> evaluate_all(const Evaluator& ev, const std::vector<kernels::FuseParams>& points,
                                      unsigned threads) {
  std::vector<Correlation> out(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, points.size() / 64)));
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 64;
  auto work = [&] {
    std::vector<double> fused;
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= points.size()) return;
      const std::size_t end = std::min(points.size(), begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) out[i] = ev.eval(points[i], fused);
    }
  };
  if (threads <= 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

// Sequential reduction in index order.
std::size_t best_index(const std::vector<kernels::FuseParams>& points, const std::vector<Correlation>& rho) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (preferred_raw(rho[i].rho, points[i], rho[best].rho, points[best])) best = i;
  }
  return best;
}

std::vector<double> around(double v, double h) {
  std::vector<double> out;
  for (double c : {v - h, v, v + h}) {
    if (c >= 0.0 && c <= 1.0 && (out.empty() || c != out.back())) out.push_back(c);
  }
  return out;
}

}  // namespace

EvalInstance eval_instance_from_json(const ordered_json& row) {
  if (!row.is_object()) throw std::invalid_argument("eval instance must be a JSON object");
  EvalInstance e;
  auto id = row.find("id");
  if (id == row.end()) throw std::invalid_argument("missing field \"id\"");
  e.id = id->is_string() ? id->get<std::string>() : id->dump();
  e.s_r = score_field(row, "s_r");
  e.s_j = score_field(row, "s_j");
  e.teacher_y = score_field(row, "teacher_y");
  return e;
}

ordered_json to_json(const EvalInstance& e) {
  return {{"id", e.id}, {"s_r", e.s_r.value()}, {"s_j", e.s_j.value()}, {"teacher_y", e.teacher_y.value()}};
}

std::vector<EvalInstance> load_eval_instances(const std::filesystem::path& jsonl) {
  std::vector<EvalInstance> out;
  io::read_jsonl(jsonl, [&](const ordered_json& row, std::size_t) {
    out.push_back(eval_instance_from_json(row));
  });
  return out;
}

std::string data_fingerprint(std::span<const EvalInstance> data) {
  io::FieldHasher h;
  for (const auto& e : data) {
    h.add(e.id).add(g17(e.s_r.value())).add(g17(e.s_j.value())).add(g17(e.teacher_y.value()));
  }
  return h.hex();
}

SearchGrid::SearchGrid(std::vector<double> tau_values, std::vector<double> w_values)
    : tau_(std::move(tau_values)), w_(std::move(w_values)) {
  check_axis(tau_, "tau");
  check_axis(w_, "w");
}

SearchGrid SearchGrid::uniform(double tau_step, double w_step) {
  return SearchGrid(axis(tau_step), axis(w_step));
}

double SearchGrid::tau_half_step() const { return half_gap(tau_); }
double SearchGrid::w_half_step() const { return half_gap(w_); }

std::size_t SearchGrid::point_count() const {
  const std::size_t t = tau_.size();
  return t * (t + 1) / 2 * w_.size() * w_.size();
}

ordered_json SearchGrid::to_json() const { return {{"tau_values", tau_}, {"w_values", w_}}; }

Correlation evaluate_params(const CascadeParams& params, std::span<const EvalInstance> data) {
  if (data.empty()) throw std::invalid_argument("evaluate_params: empty data");
  Evaluator ev(data);
  std::vector<double> fused;
  return ev.eval(to_fuse(params), fused);
}

bool preferred(double rho_a, const CascadeParams& a, double rho_b, const CascadeParams& b) {
  return preferred_raw(rho_a, to_fuse(a), rho_b, to_fuse(b));
}

CalibrationResult fit_cascade(std::span<const EvalInstance> data, const SearchGrid& grid,
                              FitOptions options) {
  if (data.empty()) throw std::invalid_argument("fit_cascade: empty data");
  const Evaluator ev(data);

  std::vector<kernels::FuseParams> points;
  points.reserve(grid.point_count());
  const auto& tau = grid.tau_values();
  const auto& w = grid.w_values();
  for (std::size_t a = 0; a < tau.size(); ++a)
    for (std::size_t b = a; b < tau.size(); ++b)
      for (double w1 : w)
        for (double w2 : w) points.push_back({tau[a], tau[b], w1, w2});
  if (points.empty()) throw std::invalid_argument("fit_cascade: empty grid after tau_a <= tau_b filter");

  auto rho = evaluate_all(ev, points, options.threads);
  std::size_t evaluated = points.size();
  const std::size_t coarse = best_index(points, rho);
  kernels::FuseParams best = points[coarse];
  Correlation best_rho = rho[coarse];

  if (options.refine) {
    std::vector<kernels::FuseParams> local;
    for (double ta : around(best.tau_a, grid.tau_half_step()))
      for (double tb : around(best.tau_b, grid.tau_half_step()))
        for (double w1 : around(best.w1, grid.w_half_step()))
          for (double w2 : around(best.w2, grid.w_half_step()))
            if (ta <= tb) local.push_back({ta, tb, w1, w2});
    const auto local_rho = evaluate_all(ev, local, options.threads);
    evaluated += local.size();
    const std::size_t i = best_index(local, local_rho);
    if (preferred_raw(local_rho[i].rho, local[i], best_rho.rho, best)) {
      best = local[i];
      best_rho = local_rho[i];
    }
  }

  CalibrationResult r;
  r.params = from_fuse(best);
  r.rho = best_rho.rho;
  r.degenerate = best_rho.degenerate || data.size() < 3;
  r.grid_points_evaluated = evaluated;
  r.fit_set_size = data.size();
  return r;
}

ordered_json params_to_json(const CascadeParams& p) {
  return {{"tau_a", p.tau_a()}, {"tau_b", p.tau_b()}, {"w1", p.w1()}, {"w2", p.w2()}};
}

CascadeParams params_from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("params must be a JSON object");
  auto num = [&](const char* k) {
    auto it = j.find(k);
    if (it == j.end() || !it->is_number()) throw std::invalid_argument(std::string("params need numeric \"") + k + "\"");
    return it->get<double>();
  };
  return CascadeParams(num("tau_a"), num("tau_b"), num("w1"), num("w2"));
}

std::string timestamp_now() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(sde, &end, 10);
    if (end && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json to_json(const CalibrationArtifact& a) {
  ordered_json j;
  j["format"] = "cascade-calibration/1";
  j["params"] = params_to_json(a.result.params);
  j["rho"] = a.result.rho;
  j["degenerate"] = a.result.degenerate;
  j["fit_set_size"] = a.result.fit_set_size;
  j["grid_points_evaluated"] = a.result.grid_points_evaluated;
  j["grid"] = a.grid;
  j["data_fingerprint"] = a.data_fingerprint;
  j["created_at"] = a.created_at;
  return j;
}

CalibrationArtifact artifact_from_json(const ordered_json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "cascade-calibration/1") {
    throw std::invalid_argument("not a calibration artifact");
  }
  CalibrationArtifact a;
  a.result.params = params_from_json(j.at("params"));
  a.result.rho = j.at("rho").get<double>();
  a.result.degenerate = j.value("degenerate", false);
  a.result.fit_set_size = j.value("fit_set_size", std::size_t{0});
  a.result.grid_points_evaluated = j.value("grid_points_evaluated", std::size_t{0});
  a.grid = j.value("grid", ordered_json::object());
  a.data_fingerprint = j.value("data_fingerprint", std::string());
  a.created_at = j.value("created_at", std::string());
  return a;
}

void write_artifact(const std::filesystem::path& path, const CalibrationArtifact& a) {
  io::write_text(path, to_json(a).dump(2) + "\n");
}

CalibrationArtifact read_artifact(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  try {
    return artifact_from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw io::SchemaError(path.string(), 0, std::string("bad calibration artifact: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw io::SchemaError(path.string(), 0, std::string("bad calibration artifact: ") + e.what());
  }
}

}  // namespace cascade::calibrator
