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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>

#include "cascade/judge/mock.hpp"
#include "cascade/multigt/expansion.hpp"
#include "curation_fixture.hpp"

using namespace cascade;
using namespace cascade::multigt;
using nlohmann::ordered_json;

namespace {

ReferenceSet one_ref(const std::string& q, const std::string& text = "logged") {
  return ReferenceSet(q, "ctx " + q, {{Candidate::reply(text), SourceTag::logged_original}}, "summary " + q);
}

class FixedScorer final : public PairScorer {
 public:
  explicit FixedScorer(std::map<std::string, double> by_ref) : by_ref_(std::move(by_ref)) {}
  Score score(std::string_view, std::string_view, std::string_view r) const override {
    return Score::of(by_ref_.at(std::string(r)));
  }

 private:
  std::map<std::string, double> by_ref_;
};

/// Fails the first `n` consistency calls, then answers from the recording.
class FlakyJudge final : public AdmissionJudge {
 public:
  explicit FlakyJudge(int n) : left_(n) {}
  bool consistent(const ReferenceSet& refs, const BatchCandidate& c, const Reference& a) const override {
    if (left_-- > 0) throw std::runtime_error("transient");
    return replay_.consistent(refs, c, a);
  }
  bool useful(const ReferenceSet& refs, const BatchCandidate& c) const override { return replay_.useful(refs, c); }

 private:
  mutable std::atomic<int> left_;
  ReplayJudge replay_;
};

}  // namespace

TEST_CASE("reference set invariants") {
  CHECK_THROWS_AS(ReferenceSet("q", "c", {}), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceSet("q", "c", {{Candidate::reply("a"), SourceTag::utility}}), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceSet("q", "c",
                               {{Candidate::reply("a"), SourceTag::logged_original},
                                {Candidate::reply(" a "), SourceTag::utility}}),
                  std::invalid_argument);
  auto rs = one_ref("q");
  CHECK(rs.add({Candidate::reply("b"), SourceTag::utility}));
  CHECK_FALSE(rs.add({Candidate::reply("  b"), SourceTag::online_consistency}));
  CHECK(rs.size() == 2);
  CHECK(rs.contains(Candidate::reply("logged ")));
  CHECK(rs.logged_original().candidate.reply_text() == "logged");
}

TEST_CASE("reference set wire form") {
  auto rs = one_ref("q");
  rs.add({Candidate::tool(ToolCall("lookup", {{"id", 3}})), SourceTag::offline_consistency});
  const auto back = ReferenceSet::from_json(rs.to_json());
  CHECK(back.to_json() == rs.to_json());
  CHECK(back.references()[1].tag == SourceTag::offline_consistency);
  CHECK(back.ticket_summary() == "summary q");
  CHECK_THROWS(ReferenceSet::from_json(ordered_json::parse(R"({"query_id":"q","context":"c","references":[{"kind":"reply","text":"a","source_tag":"guess"}]})")));
}

TEST_CASE("candidate batch wire form with recorded verdicts") {
  const auto b = CandidateBatch::from_json(ordered_json::parse(R"({"query_id":"q","origin":"online",
    "candidates":[{"kind":"reply","text":"a","recorded":{"consistency":"部分一致","utility":"Available"}},
                  {"kind":"reply","text":"b"}]})"));
  CHECK(b.origin == Origin::online_rollout);
  REQUIRE(b.candidates.size() == 2);
  CHECK(b.candidates[0].recorded.consistent == false);  // partial does not admit
  CHECK(b.candidates[0].recorded.useful == true);
  CHECK_FALSE(b.candidates[1].recorded.consistent.has_value());
  const auto again = CandidateBatch::from_json(b.to_json());
  CHECK(again.to_json() == b.to_json());
}

TEST_CASE("ECS is the max over references") {
  auto rs = one_ref("q", "r0");
  rs.add({Candidate::reply("r1"), SourceTag::utility});
  rs.add({Candidate::reply("r2"), SourceTag::utility});
  const FixedScorer s({{"r0", 0.25}, {"r1", 0.75}, {"r2", 0.5}});
  CHECK(ecs("", Candidate::reply("c"), rs, s).value() == 0.75);
  CHECK(single_reference_score("", Candidate::reply("c"), rs, s).value() == 0.25);
}

TEST_CASE("ECS over the four-member lexical ensemble") {
  auto ledger = std::make_shared<judge::CallLedger>();
  std::vector<std::unique_ptr<judge::BackendClient>> owned;
  std::vector<const judge::BackendClient*> members;
  for (int i = 0; i < 4; ++i) {
    judge::BackendDescriptor d;
    d.name = "c" + std::to_string(i);
    d.endpoint = "mock://lexical";
    d.mode = judge::BackendMode::consistency;
    owned.push_back(std::make_unique<judge::BackendClient>(d, std::make_shared<judge::MockTransport>(judge::mock::lexical()), ledger));
    members.push_back(owned.back().get());
  }
  const judge::EnsembleScorer ens(members);
  auto rs = one_ref("q", "collect system logs before reboot");
  const auto c = Candidate::reply("reboot the instance now");
  const Score single = ecs("", c, rs, ens);
  rs.add({Candidate::reply("reboot the instance now please"), SourceTag::utility});
  CHECK(ecs("", c, rs, ens) >= single);
  CHECK(ledger->total_calls() == 4 * 3);
}

TEST_CASE("dual filter precedence and tags") {
  const auto rs = one_ref("q");
  const ReplayJudge j;
  auto decide = [&](bool con, bool use, Origin o) {
    return dual_filter(rs, {Candidate::reply("x"), {con, use}}, o, j);
  };
  CHECK(decide(true, true, Origin::online_rollout).tag == SourceTag::online_consistency);
  CHECK(decide(true, false, Origin::offline_exploration).tag == SourceTag::offline_consistency);
  CHECK(decide(false, true, Origin::online_rollout).tag == SourceTag::utility);
  CHECK_FALSE(decide(false, false, Origin::online_rollout).accepted);
  // Replay refuses to invent verdicts.
  CHECK_THROWS(dual_filter(rs, {Candidate::reply("x"), {std::nullopt, true}}, Origin::online_rollout, j));
}

TEST_CASE("expansion dedups, counts rejections and is a fixed point") {
  const auto rs = one_ref("q");
  CandidateBatch b{"q", Origin::online_rollout,
                   {{Candidate::reply("a"), {true, false}},
                    {Candidate::reply(" logged "), {true, true}},
                    {Candidate::reply("b"), {false, false}},
                    {Candidate::reply("a"), {true, true}},
                    {Candidate::reply("c"), {false, true}}}};
  const ReplayJudge j;
  const std::vector<CandidateBatch> batches = {b};
  const auto r = expand_reference_set(rs, batches, j);
  CHECK(r.refs.size() == 3);
  CHECK(r.skipped_duplicates == 2);
  CHECK(r.rejected == 1);
  const auto again = expand_reference_set(r.refs, batches, j);
  CHECK(again.refs.to_json() == r.refs.to_json());
}

TEST_CASE("failing candidates are retried once, then reported") {
  const auto rs = one_ref("q");
  const std::vector<CandidateBatch> batches = {
      {"q", Origin::offline_exploration, {{Candidate::reply("a"), {true, true}}, {Candidate::reply("b"), {true, true}}}}};
  FlakyJudge flaky(1);
  const auto healed = expand_reference_set(rs, batches, flaky);
  CHECK(healed.errors.empty());
  CHECK(healed.refs.size() == 3);
  FlakyJudge dead(100);
  const auto broken = expand_reference_set(rs, batches, dead);
  CHECK(broken.errors.size() == 2);
  CHECK(broken.errors[0].candidate_index == 0);
  CHECK(broken.refs.size() == 1);
}

TEST_CASE("expand_all keeps order and reports unknown queries") {
  std::vector<ReferenceSet> sets = {one_ref("a"), one_ref("b"), one_ref("c")};
  std::vector<CandidateBatch> batches = {
      {"c", Origin::online_rollout, {{Candidate::reply("x"), {true, true}}}},
      {"zz", Origin::online_rollout, {{Candidate::reply("y"), {true, true}}}},
      {"a", Origin::online_rollout, {{Candidate::reply("x"), {false, false}}}},
  };
  const auto run = expand_all(sets, batches, ReplayJudge(), 2);
  REQUIRE(run.results.size() == 3);
  CHECK(run.results[0].refs.query_id() == "a");
  CHECK(run.results[2].refs.size() == 2);
  CHECK(run.unmatched.size() == 1);
  CHECK(run.unmatched[0].query_id == "zz");
}

TEST_CASE("expansion statistics and table format") {
  const auto& t = testing::curation_splits()[0];
  const auto fx = testing::make_replay_fixture(t, 5);
  std::vector<ReferenceSet> out;
  for (const auto& r : expand_all(fx.refsets, fx.batches, ReplayJudge(), 1).results) out.push_back(r.refs);
  const auto s = expansion_report(out, "Test");
  CHECK(s.multi_gt == 1975);
  CHECK(s.added == 975);
  const auto j = s.to_json();
  CHECK(j.at("expand_pct_2dp") == "97.50");
  const std::vector<ExpansionStats> rows = {s};
  const auto table = format_expansion_table(rows);
  const auto header_end = table.find('\n');
  const auto header = table.substr(0, header_end);
  CHECK(header.find("Split") < header.find("#Queries"));
  CHECK(header.find("Con. Judge(online)") < header.find("Con. Judge(offline)"));
  CHECK(header.find("Utility Judge") < header.find("Expand %"));
  const auto row = table.substr(header_end + 1);
  for (const char* cell : {"Test", "1000", "1975", "975", "543", "34", "398", "97.50"}) {
    CHECK(row.find(cell) != std::string::npos);
  }
}

TEST_CASE("empty report") {
  const auto s = expansion_report(std::vector<ReferenceSet>{}, "none");
  CHECK(s.expand_pct == 0.0);
  CHECK(s.n_queries == 0);
}
