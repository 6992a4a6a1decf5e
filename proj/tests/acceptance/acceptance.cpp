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

// Acceptance checks. Each criterion prints exactly one line:
//   PASS <name>: <measurements>
//   FAIL <name>: <first failed check>
// Run with no arguments for all criteria, or name one or more.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cascade/calibrator/calibrate.hpp"
#include "cascade/calibrator/spearman.hpp"
#include "cascade/core/cascade.hpp"
#include "cascade/io/jsonl.hpp"
#include "cascade/judge/mock.hpp"
#include "cascade/multigt/expansion.hpp"
#include "cascade/service/cost_model.hpp"
#include "cascade/service/reward_service.hpp"
#include "cascade/trace/plan_trace.hpp"
#include "oracles.hpp"
#include "curation_fixture.hpp"

namespace {

using namespace cascade;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::filesystem::path kFixtures = CASCADE_TEST_FIXTURES;

// ---------------------------------------------------------------------------

std::string cascade_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> knots = {0.0, 0.25, 0.5, 0.68, 0.98, 1.0};
  std::size_t bumps = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double w1 = u(rng), w2 = u(rng);
    double s_r = u(rng);
    // Every fourth triple sits exactly on an interval edge.
    if (i % 4 == 0) s_r = (i % 8 == 0) ? a : b;
    if (i % 50 == 1) s_r = knots[i % knots.size()];
    const double s_j = u(rng);
    const CascadeParams p(a, b, w1, w2);
    int judge_calls = 0;
    const auto got = route_and_fuse(
        Score::of(s_r), [&] { ++judge_calls; return Score::of(s_j); }, p);
    const auto want = testing::fused_oracle(s_r, s_j, a, b, w1, w2);
    check(static_cast<int>(got.region) == want.region, "region mismatch at triple " + std::to_string(i));
    const double err = std::fabs(got.reward.value() - want.reward);
    worst = std::max(worst, err);
    check(err <= 1e-12, "reward off by " + std::to_string(err) + " at triple " + std::to_string(i));
    check(judge_calls == (want.region == 1 ? 0 : 1), "judge call count wrong at triple " + std::to_string(i));
    bumps += (i % 4 == 0);
  }
  const double t = seconds_since(t0);
  check(t < 1.0, "runtime " + num(t, 3) + " s exceeds 1 s");
  return "10000 triples (" + std::to_string(bumps) + " on interval edges), max |diff| " + num(worst, 17) +
         ", " + num(t, 3) + " s";
}

// ---------------------------------------------------------------------------

std::string worked_examples() {
  const CascadeParams p = CascadeParams::reference();
  check(p.tau_a() == 0.68 && p.tau_b() == 0.98 && p.w1() == 0.05 && p.w2() == 0.72, "reference params differ");
  struct Case {
    double s_r, s_j;
    Region region;
    double reward;
    bool judged;
  };
  const Case cases[] = {
      {0.80, 0.10, Region::fast_pass, 0.80, false},
      {0.50, 0.90, Region::mix_low, 0.880, true},
      {0.99, 0.50, Region::mix_high, 0.8528, true},
  };
  std::ostringstream msg;
  for (const auto& c : cases) {
    bool judged = false;
    const auto out = route_and_fuse(Score::of(c.s_r), [&] { judged = true; return Score::of(c.s_j); }, p);
    check(out.region == c.region, "region for s_r=" + num(c.s_r, 2));
    check(judged == c.judged, "judge invocation for s_r=" + num(c.s_r, 2));
    // "Exactly" at the stated precision: the printed four-decimal value matches.
    check(num(out.reward.value(), 4) == num(c.reward, 4), "reward " + num(out.reward.value(), 17));
    check(std::fabs(out.reward.value() - c.reward) <= 1e-12, "reward " + num(out.reward.value(), 17));
    msg << num(c.s_r, 2) << "->" << num(out.reward.value(), 4) << " " << to_string(out.region) << "; ";
  }
  std::string s = msg.str();
  return s.substr(0, s.size() - 2);
}

// ---------------------------------------------------------------------------

std::vector<calibrator::EvalInstance> synthetic_noisy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.08);
  std::vector<calibrator::EvalInstance> data;
  for (std::size_t i = 0; i < n; ++i) {
    const double truth = u(rng);
    const double s_r = std::clamp(truth + noise(rng) * 2.0, 0.0, 1.0);
    const double s_j = std::clamp(truth + noise(rng), 0.0, 1.0);
    const double y = std::clamp(truth + noise(rng) * 0.5, 0.0, 1.0);
    data.push_back({"n" + std::to_string(i), Score::of(s_r), Score::of(s_j), Score::of(y)});
  }
  return data;
}

struct OracleMax {
  double rho = -2.0;
  std::size_t points = 0;
};

OracleMax exhaustive_oracle(const std::vector<calibrator::EvalInstance>& data, const std::vector<double>& taus,
                            const std::vector<double>& ws) {
  std::vector<double> y, fused(data.size());
  for (const auto& d : data) y.push_back(d.teacher_y.value());
  const auto y_ranks = testing::sorted_ranks(y);
  OracleMax best;
  for (double a : taus)
    for (double b : taus) {
      if (a > b) continue;
      for (double w1 : ws)
        for (double w2 : ws) {
          for (std::size_t i = 0; i < data.size(); ++i) {
            fused[i] = testing::fused_oracle(data[i].s_r.value(), data[i].s_j.value(), a, b, w1, w2).reward;
          }
          best.rho = std::max(best.rho, testing::pearson_ld(testing::sorted_ranks(fused), y_ranks));
          ++best.points;
        }
    }
  return best;
}

std::string calibrator_oracle() {
  const auto t0 = Clock::now();
  std::vector<double> taus, ws;
  for (int k = 0; k <= 20; ++k) taus.push_back(k / 20.0);
  for (int k = 0; k <= 10; ++k) ws.push_back(k / 10.0);
  const calibrator::SearchGrid grid(taus, ws);
  check(grid.point_count() == 27951, "filtered grid has " + std::to_string(grid.point_count()) + " points");

  const auto data = synthetic_noisy(500, 29);
  const OracleMax oracle = exhaustive_oracle(data, taus, ws);
  check(oracle.points == 27951, "oracle visited " + std::to_string(oracle.points) + " points");

  const auto coarse = calibrator::fit_cascade(data, grid, {.refine = false, .threads = 0});
  check(coarse.grid_points_evaluated == 27951, "fit evaluated " + std::to_string(coarse.grid_points_evaluated));
  const double gap = std::fabs(coarse.rho - oracle.rho);
  check(gap <= 1e-9, "coarse fit rho " + num(coarse.rho, 12) + " vs oracle " + num(oracle.rho, 12));
  const double recheck = calibrator::evaluate_params(coarse.params, data).rho;
  check(std::fabs(recheck - coarse.rho) <= 1e-12, "reported rho does not match its params");

  const auto refined = calibrator::fit_cascade(data, grid, {.refine = true, .threads = 0});
  check(refined.rho >= oracle.rho - 1e-9, "refinement lowered rho");

  // Planted, noiseless: teacher is the exact cascade output at an on-grid theta*.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CascadeParams planted(0.30, 0.70, 0.20, 0.60);
  std::vector<calibrator::EvalInstance> clean;
  for (int i = 0; i < 500; ++i) {
    const double s_r = u(rng), s_j = u(rng);
    const double y = testing::fused_oracle(s_r, s_j, 0.30, 0.70, 0.20, 0.60).reward;
    clean.push_back({"p" + std::to_string(i), Score::of(s_r), Score::of(s_j), Score::of(y)});
  }
  const auto fit = calibrator::fit_cascade(clean, grid, {.refine = false, .threads = 0});
  check(std::fabs(fit.rho - 1.0) <= 1e-12, "planted fit rho " + num(fit.rho, 15));
  const double at_planted = calibrator::evaluate_params(planted, clean).rho;
  check(std::fabs(at_planted - 1.0) <= 1e-12, "planted theta scores " + num(at_planted, 15));
  check(std::fabs(fit.rho - at_planted) <= calibrator::kRhoTieTolerance, "planted theta not among tied optima");

  const double t = seconds_since(t0);
  check(t < 30.0, "runtime " + num(t, 2) + " s exceeds 30 s");
  return "27951 points, fit rho " + num(coarse.rho, 10) + " = oracle " + num(oracle.rho, 10) + " (|d| " +
         num(gap, 15) + "), refined " + num(refined.rho, 10) + ", planted rho " + num(fit.rho, 12) + ", " +
         num(t, 2) + " s";
}

// ---------------------------------------------------------------------------

std::string spearman_suite() {
  using calibrator::spearman;
  const std::vector<double> a1 = {1, 2, 3}, b1 = {10, 20, 30};
  check(spearman(a1, b1).rho == 1.0, "identical orderings");
  const std::vector<double> a2 = {3, 1, 2}, b2 = {1, 2, 3};
  check(std::fabs(spearman(a2, b2).rho + 0.5) <= 1e-9, "[3,1,2] vs [1,2,3] gives " + num(spearman(a2, b2).rho, 12));
  const std::vector<double> a3 = {1, 1, 2};
  const double tie = spearman(a3, b2).rho;
  check(std::fabs(tie - std::sqrt(3.0) / 2.0) <= 1e-9, "tie case gives " + num(tie, 12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> len(2, 60), small(0, 5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      // A third of the vectors carry heavy ties.
      x[i] = (k % 3 == 0) ? small(rng) : u(rng);
      y[i] = (k % 3 == 1) ? small(rng) : u(rng);
    }
    std::vector<double> fx(n), gy(n);
    for (int i = 0; i < n; ++i) {
      fx[i] = std::exp(x[i]) + 2.0 * x[i];  // strictly increasing
      gy[i] = std::atan(y[i]) * 7.0 - 1.0;  // strictly increasing
    }
    const auto base = spearman(x, y);
    const auto moved = spearman(fx, gy);
    check(base.degenerate == moved.degenerate, "degeneracy changed at vector " + std::to_string(k));
    check(std::fabs(base.rho - moved.rho) <= 1e-12, "rho changed under transform at vector " + std::to_string(k));
    const double oracle = testing::pearson_ld(testing::counting_ranks(x), testing::counting_ranks(y));
    worst = std::max(worst, std::fabs(base.rho - oracle));
    check(std::fabs(base.rho - oracle) <= 1e-9, "disagrees with the counting-rank oracle at vector " + std::to_string(k));
  }
  return "closed forms 1.0 / -0.5 / " + num(tie, 10) + "; 1000 transformed vectors invariant, max oracle |d| " +
         num(worst, 15);
}

// ---------------------------------------------------------------------------

std::string reward_time_reduction() {
  const auto t0 = Clock::now();
  const CascadeParams p = CascadeParams::reference();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> in(0.68, 0.98), low(0.0, 0.68), high(0.9800001, 1.0);
  // 3000 replies, exactly 990 (33%) inside the trust interval.
  std::vector<Region> regions;
  for (int i = 0; i < 3000; ++i) {
    double s_r;
    if (i % 100 < 33) {
      s_r = in(rng);
    } else {
      s_r = (i % 2) ? low(rng) : high(rng);
    }
    regions.push_back(classify(s_r, p));
  }
  std::shuffle(regions.begin(), regions.end(), rng);
  const service::LatencyWeights w{1.0, 10.0};
  std::ostringstream msg;
  for (unsigned workers : {1u, 8u}) {
    const auto r = service::replay_reward_time(regions, w, workers);
    check(r.fast_pass_fraction >= 0.33, "fast-pass fraction " + num(r.fast_pass_fraction, 4));
    check(r.ratio <= 0.70 + 0.03, "time ratio " + num(r.ratio, 4) + " with " + std::to_string(workers) + " workers");
    check(std::fabs(r.ratio - 0.70) <= 0.03, "time ratio " + num(r.ratio, 4) + " not within 3 pp of 0.70");
    check(std::fabs(r.ratio - service::closed_form_time_ratio(r.fast_pass_fraction, w)) <= 0.03,
          "replay disagrees with the closed form");
    check(r.judge_calls == 2010, "judge calls " + std::to_string(r.judge_calls));
    msg << workers << " worker(s): ratio " << num(r.ratio, 4) << " (reduction " << num(100.0 * (1.0 - r.ratio), 1)
        << "%); ";
  }
  const double t = seconds_since(t0);
  check(t < 10.0, "runtime " + num(t, 2) + " s");
  return "fast-pass 0.33, " + msg.str() + num(t, 3) + " s";
}

// ---------------------------------------------------------------------------

/// Consistency mock whose label depends only on (candidate, reference) and
/// the member, so scores are reproducible and ties are common.
judge::MockHandler hashed_labels(unsigned member) {
  return [member](const judge::BackendDescriptor&, const ordered_json& req) {
    static const char* labels[] = {"一致", "部分一致", "不一致"};
    const std::size_t h = std::hash<std::string>{}(req.at("candidate").get<std::string>() + "\x1f" +
                                                   req.at("reference").get<std::string>() + std::to_string(member));
    return ordered_json{{"verdict", {{"judge_result", labels[h % 3]}}}}.dump();
  };
}

std::string ecs_properties() {
  auto ledger = std::make_shared<judge::CallLedger>();
  std::vector<std::unique_ptr<judge::BackendClient>> members;
  std::vector<const judge::BackendClient*> ptrs;
  for (unsigned m = 0; m < 3; ++m) {
    judge::BackendDescriptor d;
    d.name = "consistency_" + std::to_string(m);
    d.endpoint = "mock://hashed";
    d.mode = judge::BackendMode::consistency;
    members.push_back(std::make_unique<judge::BackendClient>(
        d, std::make_shared<judge::MockTransport>(hashed_labels(m)), ledger));
    ptrs.push_back(members.back().get());
  }
  const judge::EnsembleScorer ensemble(ptrs);

  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> pool(0, 40), extra(1, 6);
  std::size_t checks = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::string ctx = "ctx-" + std::to_string(k);
    const Candidate cand = Candidate::reply("cand-" + std::to_string(pool(rng)));
    multigt::ReferenceSet refs("q" + std::to_string(k), ctx,
                               {{Candidate::reply("logged-" + std::to_string(k)), multigt::SourceTag::logged_original}});

    const Score single = multigt::single_reference_score(ctx, cand, refs, ensemble);
    const Score singleton = multigt::ecs(ctx, cand, refs, ensemble);
    check(singleton == single, "singleton identity broken at case " + std::to_string(k));
    check(singleton == ensemble.score(ctx, cand.reply_text(), refs.logged_original().candidate.reply_text()),
          "singleton differs from the direct ensemble score at case " + std::to_string(k));

    Score prev = singleton;
    const int n_extra = extra(rng);
    for (int e = 0; e < n_extra; ++e) {
      refs.add({Candidate::reply("alt-" + std::to_string(pool(rng)) + "-" + std::to_string(e)),
                multigt::SourceTag::utility});
      const Score now = multigt::ecs(ctx, cand, refs, ensemble);
      check(now >= prev, "ECS decreased after adding a reference at case " + std::to_string(k));
      check(now >= single, "Multi-GT ECS below single-reference score at case " + std::to_string(k));
      // Independent max over direct ensemble calls.
      double mx = 0.0;
      for (const auto& r : refs.references()) {
        mx = std::max(mx, ensemble.score(ctx, cand.reply_text(), r.candidate.reply_text()).value());
      }
      check(now.value() == mx, "ECS is not the max over references at case " + std::to_string(k));
      prev = now;
      ++checks;
    }
  }
  return "1000 cases, " + std::to_string(checks) + " reference additions; monotone, >= single, singleton exact";
}

// ---------------------------------------------------------------------------

std::string curation_tallies() {
  std::vector<multigt::ExpansionStats> rows;
  const multigt::ReplayJudge judge;
  for (const auto& t : testing::curation_splits()) {
    const auto fx = testing::make_replay_fixture(t, 101);
    const auto run = multigt::expand_all(fx.refsets, fx.batches, judge, 0);
    check(run.unmatched.empty(), t.name + ": unmatched batches");
    std::vector<multigt::ReferenceSet> out;
    for (const auto& r : run.results) {
      check(r.errors.empty(), t.name + ": expansion errors");
      out.push_back(r.refs);
    }
    const auto s = multigt::expansion_report(out, t.name);
    using multigt::SourceTag;
    check(s.n_queries == t.queries, t.name + ": #queries " + std::to_string(s.n_queries));
    check(s.single_gt == t.queries, t.name + ": single-gt " + std::to_string(s.single_gt));
    check(s.multi_gt == t.expected_multi_gt, t.name + ": multi-gt " + std::to_string(s.multi_gt));
    check(s.added == t.expected_added, t.name + ": added " + std::to_string(s.added));
    check(s.by_source.at(SourceTag::online_consistency) == t.online, t.name + ": online count");
    check(s.by_source.at(SourceTag::offline_consistency) == t.offline, t.name + ": offline count");
    check(s.by_source.at(SourceTag::utility) == t.utility, t.name + ": utility count");
    // Identities.
    check(s.multi_gt == s.single_gt + s.added, t.name + ": multi != single + added");
    check(s.added == t.online + t.offline + t.utility, t.name + ": added != sum of sources");
    check(std::fabs(s.expand_pct - 100.0 * s.added / s.single_gt) <= 1e-12, t.name + ": expand % identity");
    check(num(s.expand_pct, 2) == t.expected_pct, t.name + ": expand % " + num(s.expand_pct, 2));
    // Replaying the expanded sets again admits nothing new.
    std::vector<multigt::ReferenceSet> again;
    for (const auto& r : multigt::expand_all(out, fx.batches, judge, 0).results) again.push_back(r.refs);
    check(multigt::expansion_report(again, t.name).multi_gt == s.multi_gt, t.name + ": replay is not a fixed point");
    rows.push_back(s);
  }
  const std::string table = multigt::format_expansion_table(rows);
  check(table.find("97.50") != std::string::npos && table.find("109.10") != std::string::npos &&
            table.find("97.79") != std::string::npos,
        "formatted table lacks the expand % values");
  return "Test 1975/975/97.50, Val 2091/1091/109.10, Train 10127/5007/97.79 reproduced";
}

// ---------------------------------------------------------------------------

std::string trace_roundtrip() {
  const auto rows = io::read_jsonl(kFixtures / "plan_traces.jsonl");
  check(rows.size() == 50, "corpus has " + std::to_string(rows.size()) + " traces");
  std::size_t empty = 0, multi = 0;
  for (const auto& row : rows) {
    const std::string id = row.at("id");
    const std::string raw = row.at("raw");
    const trace::PlanTrace t = trace::parse_plan_trace(raw);
    check(t.actions().size() == row.at("n_actions").get<std::size_t>(), id + ": action count");
    check(trace::parse_plan_trace(trace::serialize_plan_trace(t)) == t, id + ": parse(serialize(t)) != t");
    check(trace::serialize_plan_trace(t) == raw, id + ": serialize(parse(raw)) != raw");
    empty += t.actions().empty();
    multi += t.actions().size() > 1;
  }
  check(empty > 0 && multi > 0, "corpus lacks empty-action or multi-action traces");

  const auto rules = trace::ValidationRules::defaults();
  auto load = [&](const char* name) {
    return trace::parse_plan_trace(io::read_text(kFixtures / "validation" / name));
  };
  const auto clean = trace::validate_plan_trace(load("clean.txt"), rules);
  check(clean.empty(), "clean fixture reports " + std::to_string(clean.size()) + " violation(s)");
  const auto missing = trace::validate_plan_trace(load("missing_marker.txt"), rules);
  check(missing.size() == 1 && missing[0].rule == "missing_marker" &&
            missing[0].detail.find("因此，我可以") != std::string::npos,
        "missing-marker fixture misclassified");
  const auto leak = trace::validate_plan_trace(load("phone_leak.txt"), rules);
  check(!leak.empty(), "11-digit leak not flagged");
  for (const auto& v : leak) {
    check(v.rule == "sensitive_data" && v.section == "plan_1", "leak fixture has unexpected violation " + v.rule);
  }
  return "50 traces round-trip (" + std::to_string(empty) + " empty-action, " + std::to_string(multi) +
         " multi-action); clean / missing marker / 11-digit leak classified";
}

// ---------------------------------------------------------------------------

struct ServiceFixture {
  std::vector<service::RewardItem> items;
  std::vector<double> s_r, s_j;  // per item; NaN for non-cascade items
  std::size_t replies = 0;
};

ServiceFixture make_service_items(std::size_t n, std::uint64_t seed, ordered_json& reranker_entries,
                                  ordered_json& judge_entries) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ServiceFixture f;
  reranker_entries = ordered_json::array();
  judge_entries = ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "item-" + std::to_string(i);
    service::RewardItem item{id, "context " + std::to_string(i), Candidate::reply("x"), {}};
    const double nan = std::nan("");
    if (i % 10 == 7) {  // tool call matching its reference
      ToolCall call("lookup", {{"key", static_cast<int>(i)}});
      item.candidate = Candidate::tool(call);
      item.references = {Candidate::tool(call)};
      f.s_r.push_back(nan);
      f.s_j.push_back(nan);
    } else if (i % 10 == 9) {  // action-type mismatch
      item.candidate = Candidate::tool(ToolCall("lookup", {}));
      item.references = {Candidate::reply("reference " + id)};
      f.s_r.push_back(nan);
      f.s_j.push_back(nan);
    } else {
      const double sr = std::round(u(rng) * 1000.0) / 1000.0;
      const double yes = std::round(u(rng) * 100.0) / 100.0;
      const double part = std::round(u(rng) * (1.0 - yes) * 100.0) / 100.0;
      const std::string cand = "candidate " + id, ref = "reference " + id;
      item.candidate = Candidate::reply(cand);
      item.references = {Candidate::reply(ref)};
      reranker_entries.push_back({{"candidate", cand}, {"reference", ref}, {"response", {{"score", sr}}}});
      judge_entries.push_back({{"candidate", cand},
                               {"reference", ref},
                               {"response", {{"probabilities", {{"yes", yes}, {"part", part}, {"no", std::max(0.0, 1.0 - yes - part)}}}}}});
      f.s_r.push_back(sr);
      f.s_j.push_back(yes + 0.5 * part);
      ++f.replies;
    }
    f.items.push_back(std::move(item));
  }
  return f;
}

std::string service_end_to_end() {
  ordered_json rerank, judge_tbl;
  const ServiceFixture fx = make_service_items(400, 41, rerank, judge_tbl);
  const ordered_json cfg_json = {
      {"backends",
       {{"reranker", {{"endpoint", "mock://keyed"}, {"mock", {{"kind", "keyed"}, {"entries", rerank}}}}},
        {"judge",
         {{"endpoint", "mock://keyed"}, {"mode", "soft_judge"}, {"mock", {{"kind", "keyed"}, {"entries", judge_tbl}}}}}}},
      {"params", calibrator::params_to_json(CascadeParams::reference())}};
  const auto config = service::ServiceConfig::from_json(cfg_json);
  const CascadeParams p = CascadeParams::reference();

  service::RewardRequest req;
  req.items = fx.items;

  auto fresh = [&](unsigned workers, std::optional<std::filesystem::path> cache = std::nullopt) {
    return std::make_unique<service::RewardService>(std::make_shared<service::BackendSet>(config), p, cache, workers);
  };

  // Order, correctness vs the oracle, and judge-call counting.
  auto svc = fresh(4);
  const auto first = svc->handle_batch(req);
  check(first.items.size() == fx.items.size(), "response size");
  std::size_t mix = 0, fast = 0;
  for (std::size_t i = 0; i < fx.items.size(); ++i) {
    const auto& r = first.items[i];
    check(r.request_id == fx.items[i].request_id, "order not preserved at index " + std::to_string(i));
    check(r.outcome.has_value() && !r.error, "item " + r.request_id + " errored: " + (r.error ? r.error->message : ""));
    if (std::isnan(fx.s_r[i])) {
      const double want = (i % 10 == 7) ? 1.0 : 0.0;
      check(r.outcome->reward.value() == want && !r.outcome->judge_invoked, "non-cascade item " + r.request_id);
      continue;
    }
    const auto want = testing::fused_oracle(fx.s_r[i], fx.s_j[i], p.tau_a(), p.tau_b(), p.w1(), p.w2());
    check(static_cast<int>(r.outcome->region) == want.region, "region of " + r.request_id);
    check(std::fabs(r.outcome->reward.value() - want.reward) <= 1e-12, "reward of " + r.request_id);
    check(r.outcome->judge_invoked == (want.region != 1), "judge_invoked of " + r.request_id);
    mix += want.region != 1;
    fast += want.region == 1;
  }
  const auto& ledger = svc->backends().ledger();
  check(ledger.counters("judge").calls == mix,
        "judge calls " + std::to_string(ledger.counters("judge").calls) + " != mix items " + std::to_string(mix));
  check(ledger.counters("reranker").calls == fx.replies, "reranker calls");
  check(std::fabs(first.batch_stats.fast_pass_fraction - double(fast) / fx.replies) <= 1e-12, "fast_pass_fraction");

  // Cache hits: identical outcomes, no backend traffic.
  const auto calls_before = ledger.total_calls();
  const auto second = svc->handle_batch(req);
  check(ledger.total_calls() == calls_before, "cache hits still called backends");
  for (std::size_t i = 0; i < fx.items.size(); ++i) {
    check(second.items[i].cache_hit, "no cache hit for " + fx.items[i].request_id);
    check(second.items[i].outcome->reward == first.items[i].outcome->reward &&
              second.items[i].outcome->region == first.items[i].outcome->region &&
              second.items[i].outcome->judge_invoked == first.items[i].outcome->judge_invoked,
          "cached outcome differs for " + fx.items[i].request_id);
  }

  // Soundness: changed params or references must miss.
  service::RewardRequest shifted = req;
  shifted.options.params_override = CascadeParams(0.2, 0.5, 0.3, 0.4);
  const auto third = svc->handle_batch(shifted);
  for (std::size_t i = 0; i < fx.items.size(); ++i) {
    check(!third.items[i].cache_hit, "stale hit under new params for " + fx.items[i].request_id);
    if (std::isnan(fx.s_r[i])) continue;
    const auto want = testing::fused_oracle(fx.s_r[i], fx.s_j[i], 0.2, 0.5, 0.3, 0.4);
    check(std::fabs(third.items[i].outcome->reward.value() - want.reward) <= 1e-12, "reward under override");
  }
  service::RewardRequest edited = req;
  edited.items.erase(edited.items.begin() + 1, edited.items.end());
  edited.items[0].references.push_back(Candidate::reply("reference item-1"));
  check(!svc->handle_batch(edited).items[0].cache_hit, "hit after the reference set changed");

  // Determinism across worker counts, byte-for-byte on the wire.
  const auto serial = fresh(1)->handle_batch(req);
  auto strip = [](ordered_json j) {
    j.erase("batch_stats");
    return j.dump();
  };
  check(strip(serial.to_json()) == strip(first.to_json()), "1 worker and 4 workers disagree");

  // Persistent cache reload.
  const auto dir = std::filesystem::temp_directory_path() / ("cascade_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto cache_file = dir / "cache.jsonl";
  std::filesystem::remove(cache_file);
  const auto persisted = fresh(2, cache_file)->handle_batch(req);
  auto reloaded_svc = fresh(2, cache_file);
  const auto reloaded = reloaded_svc->handle_batch(req);
  check(reloaded_svc->backends().ledger().total_calls() == 0, "reloaded cache still called backends");
  for (std::size_t i = 0; i < fx.items.size(); ++i) {
    check(reloaded.items[i].cache_hit && reloaded.items[i].outcome->reward == persisted.items[i].outcome->reward,
          "persisted cache mismatch for " + fx.items[i].request_id);
  }
  std::filesystem::remove_all(dir);

  return std::to_string(fx.items.size()) + " items (" + std::to_string(mix) + " judged, " + std::to_string(fast) +
         " fast pass): order kept, oracle rewards, judge calls = mix items, cache hits exact and sound, "
         "1 vs 4 workers identical";
}

struct Criterion {
  const char* name;
  std::function<std::string()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"cascade_exactness", cascade_exactness},   {"worked_examples", worked_examples},
      {"calibrator_oracle", calibrator_oracle},   {"spearman_suite", spearman_suite},
      {"reward_time_reduction", reward_time_reduction}, {"ecs_properties", ecs_properties},
      {"curation_tallies", curation_tallies},           {"trace_roundtrip", trace_roundtrip},
      {"service_end_to_end", service_end_to_end},
  };
  std::vector<const Criterion*> selected;
  for (int i = 1; i < argc; ++i) {
    bool found = false;
    for (const auto& c : all) {
      if (std::strcmp(argv[i], c.name) == 0) {
        selected.push_back(&c);
        found = true;
      }
    }
    if (!found) {
      std::cerr << "unknown criterion: " << argv[i] << "\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& c : all) selected.push_back(&c);
  }

  int failed = 0;
  for (const auto* c : selected) {
    try {
      const std::string detail = c->run();
      std::cout << "PASS " << c->name << ": " << detail << std::endl;
    } catch (const Failure& f) {
      std::cout << "FAIL " << c->name << ": " << f.what << std::endl;
      ++failed;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << c->name << ": exception: " << e.what() << std::endl;
      ++failed;
    }
  }
  return failed ? 1 : 0;
}
