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

#include "cascade/io/jsonl.hpp"
#include "cascade/trace/plan_trace.hpp"
#include "cascade/trace/qc.hpp"
#include "cascade/trace/sft.hpp"

using namespace cascade;
using namespace cascade::trace;
using nlohmann::ordered_json;

namespace {

const std::filesystem::path kFixtures = CASCADE_TEST_FIXTURES;

std::string clean_raw() { return io::read_text(kFixtures / "validation" / "clean.txt"); }

TraceErrorCode parse_code(const std::string& raw) {
  try {
    parse_plan_trace(raw);
  } catch (const TraceParseError& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return TraceErrorCode::missing_tag;
}

ordered_json rewrite_qc(int anonymized) {
  ordered_json j;
  for (const char* d : RewriteQCReport::kDimensions) j[d] = {{"score", 1}, {"details", "ok"}};
  j["plans_anonymized"]["score"] = anonymized;
  j["violation_list"] = "";
  return j;
}

ordered_json plan_qc(int c, int s, int a) {
  return {{"scores", {{"compliance_score", c}, {"structure_score", s}, {"anonymization_score", a}}},
          {"total_score", c + s + a},
          {"analysis", {{"compliance", ""}, {"structure", ""}, {"anonymization", ""}}},
          {"violation_details", ""},
          {"final_judgment", c + s + a == 3 ? "合格" : "不合格"}};
}

}  // namespace

TEST_CASE("parse well-formed traces") {
  const auto t = parse_plan_trace(clean_raw());
  CHECK(t.actions().size() == 1);
  CHECK(t.actions()[0].tool_name() == "check_security_group");
  CHECK(t.plan_2().find("因此，我可以") != std::string::npos);

  const auto empty = parse_plan_trace("<plans><plan_1>a</plan_1><plan_2>b</plan_2></plans><actions>[]</actions>");
  CHECK(empty.actions().empty());
  CHECK(empty.plan_1() == "a");

  // Optional "action" labels and surrounding prose are tolerated.
  const auto labelled = parse_plan_trace(
      "Thoughts first.\n<plans><plan_1>a</plan_1><plan_2>b</plan_2></plans>\n<actions>\n"
      R"([{"action":"call_tool","tool_name":"f","parameters":{"x":1}},{"tool_name":"g","parameters":{}}])"
      "\n</actions>");
  CHECK(labelled.actions().size() == 2);
  CHECK(parse_plan_trace(serialize_plan_trace(labelled)) == labelled);
}

TEST_CASE("known tool call survives embedding") {
  const ToolCall call("fetch_monitor_metrics", ordered_json::parse(R"({"metric":"cpu_util","window_min":30,"tags":["a","b"]})"));
  const auto t = PlanTrace::make("先查询监控", "假设负载过高，这说明需要扩容，因此，我可以建议扩容", {call});
  const auto back = parse_plan_trace(serialize_plan_trace(t));
  REQUIRE(back.actions().size() == 1);
  CHECK(back.actions()[0] == call);
  CHECK(back == t);
}

TEST_CASE("malformed traces") {
  const std::string good = "<plans><plan_1>a</plan_1><plan_2>b</plan_2></plans><actions>[]</actions>";
  CHECK(parse_code("<plans><plan_1>a</plan_1><plan_2>b</plans><actions>[]</actions>") == TraceErrorCode::unclosed_tag);
  CHECK(parse_code("<plans><plan_1>a</plan_1></plans><actions>[]</actions>") == TraceErrorCode::missing_tag);
  CHECK(parse_code("<plans><plan_2>b</plan_2><plan_1>a</plan_1></plans><actions>[]</actions>") == TraceErrorCode::tag_order);
  CHECK(parse_code(good + good) == TraceErrorCode::duplicate_tag);
  CHECK(parse_code("<plans><plan_1>  </plan_1><plan_2>b</plan_2></plans><actions>[]</actions>") == TraceErrorCode::empty_plan);
  CHECK(parse_code("<plans><plan_1>a</plan_1><plan_2>b</plan_2></plans><actions>[{]</actions>") == TraceErrorCode::malformed_actions);
  CHECK(parse_code("<plans><plan_1>a</plan_1><plan_2>b</plan_2></plans><actions>{}</actions>") == TraceErrorCode::malformed_actions);

  const std::string unclosed = "<plans><plan_1>a</plan_1><plan_2>b</plans><actions>[]</actions>";
  try {
    parse_plan_trace(unclosed);
  } catch (const TraceParseError& e) {
    CHECK(e.offset() == unclosed.find("<plan_2>"));
  }
  CHECK_THROWS_AS(PlanTrace::make("", "b"), std::invalid_argument);
  CHECK_THROWS_AS(PlanTrace::make("a<plan_2>", "b"), std::invalid_argument);
}

TEST_CASE("fixture corpus round-trips") {
  const auto rows = io::read_jsonl(kFixtures / "plan_traces.jsonl");
  CHECK(rows.size() == 50);
  for (const auto& r : rows) {
    const auto t = parse_plan_trace(r.at("raw").get<std::string>());
    CHECK(serialize_plan_trace(t) == r.at("raw").get<std::string>());
    // Validation rules accept every corpus trace.
    CHECK(validate_plan_trace(t, ValidationRules::defaults()).empty());
  }
}

TEST_CASE("validation fixtures") {
  const auto rules = ValidationRules::defaults();
  auto load = [](const char* n) { return parse_plan_trace(io::read_text(kFixtures / "validation" / n)); };
  CHECK(validate_plan_trace(load("clean.txt"), rules).empty());
  const auto missing = validate_plan_trace(load("missing_marker.txt"), rules);
  REQUIRE(missing.size() == 1);
  CHECK(missing[0].rule == "missing_marker");
  CHECK(missing[0].section == "plan_2");
  const auto leak = validate_plan_trace(load("phone_leak.txt"), rules);
  REQUIRE(leak.size() == 1);
  CHECK(leak[0].rule == "sensitive_data");
}

TEST_CASE("marker order and other sensitive patterns") {
  const auto rules = ValidationRules::defaults();
  const auto out_of_order = PlanTrace::make("a", "因此，我可以先处理。这说明问题在网络。可能是配置问题。");
  const auto v = validate_plan_trace(out_of_order, rules);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].rule == "marker_order");
  const auto url = PlanTrace::make("访问 https://console.example.com/x 查看", "假设A，这个说明B，因此,我可以C");
  const auto u = validate_plan_trace(url, rules);
  REQUIRE_FALSE(u.empty());
  CHECK(u[0].rule == "sensitive_data");
  auto strict = rules;
  strict.require_rationale = true;
  const auto r = validate_plan_trace(PlanTrace::make("a", "假设A，这个说明B，因此，我可以C"), strict, "   ");
  REQUIRE(r.size() == 1);
  CHECK(r[0].rule == "empty_rationale");
}

TEST_CASE("QC schemas and gating") {
  const auto ok = parse_qc_report(rewrite_qc(1));
  const auto bad = parse_qc_report(rewrite_qc(0));
  CHECK(std::holds_alternative<RewriteQCReport>(ok));
  CHECK(gate_by_qc(std::vector<QcReport>{ok}));
  CHECK_FALSE(gate_by_qc(std::vector<QcReport>{ok, bad}));
  QcPolicy waive;
  waive.waived = {"plans_anonymized"};
  CHECK(gate_by_qc(std::vector<QcReport>{bad}, waive));

  const auto p = parse_qc_report(plan_qc(1, 1, 0));
  CHECK(std::holds_alternative<PlanQCReport>(p));
  CHECK_FALSE(gate_by_qc(std::vector<QcReport>{p}));
  auto inconsistent = plan_qc(1, 1, 1);
  inconsistent["total_score"] = 2;
  CHECK_THROWS_AS(parse_qc_report(inconsistent), std::invalid_argument);
  auto nonbinary = rewrite_qc(1);
  nonbinary["logic_consistency"]["score"] = 2;
  CHECK_THROWS_AS(parse_qc_report(nonbinary), std::invalid_argument);
  auto missing = rewrite_qc(1);
  missing.erase("actions_accuracy");
  CHECK_THROWS_AS(parse_qc_report(missing), std::invalid_argument);
  CHECK(dimension_scores(p).size() == 3);
}

TEST_CASE("SFT rendering keeps the rationale before the response") {
  const DRARecord d{"d1", "用户：无法登录", "日志显示密码错误，因此建议重置", Candidate::reply("请重置密码")};
  const auto j = render_sft_record(d);
  REQUIRE(j.at("messages").size() == 3);
  CHECK(j["messages"][0]["role"] == "user");
  CHECK(j["messages"][1]["role"] == "reasoning");
  CHECK(j["messages"][2]["role"] == "assistant");
  const DRARecord tool{"d2", "ctx", "", Candidate::tool(ToolCall("reset_password", {{"user", "u1"}}))};
  const auto t = render_sft_record(tool);
  CHECK(t["messages"].size() == 2);
  const auto call = ordered_json::parse(t["messages"][1]["content"].get<std::string>());
  CHECK(call["action"] == "call_tool");
  CHECK(call["tool_name"] == "reset_password");
}

TEST_CASE("SFT record building is deterministic") {
  const auto trace = parse_plan_trace(clean_raw());
  std::vector<SftInput> in = {DRARecord{"d1", "c", "r", Candidate::reply("a")},
                              DRARecord{"d2", "c", "r", Candidate::reply("b")},
                              PlanningRecord{"p1", "c", "", trace},
                              PlanningRecord{"p2", "c", "", trace}};
  const auto decision = build_sft_records(in, SftMode::decision, 7);
  REQUIRE(decision.size() == 4);
  CHECK(decision[0]["id"] == "d1");
  const auto m1 = build_sft_records(in, SftMode::mix, 7);
  const auto m2 = build_sft_records(in, SftMode::mix, 7);
  CHECK(m1 == m2);
  CHECK(m1.size() == 4);
  CHECK(seeded_permutation(10, 7) == seeded_permutation(10, 7));
  auto perm = seeded_permutation(50, 1);
  std::sort(perm.begin(), perm.end());
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(perm[i] == i);
  CHECK(seeded_permutation(50, 1) != seeded_permutation(50, 2));
  CHECK_THROWS(sft_mode_from_string("shuffle"));
}

TEST_CASE("augment rejects with reasons") {
  std::vector<ordered_json> rows = {
      {{"id", "ok"}, {"context", "c"}, {"type", "planning"}, {"trace", clean_raw()}, {"qc", {plan_qc(1, 1, 1)}}},
      {{"id", "leak"}, {"context", "c"}, {"type", "planning"},
       {"trace", io::read_text(kFixtures / "validation" / "phone_leak.txt")}},
      {{"id", "broken"}, {"context", "c"}, {"type", "planning"}, {"trace", "<plans>oops"}},
      {{"id", "gated"}, {"context", "c"}, {"type", "decision"}, {"rationale", "因为"},
       {"response", {{"kind", "reply"}, {"text", "好的"}}}, {"qc", {rewrite_qc(0)}}},
      {{"id", "dec"}, {"context", "c"}, {"type", "decision"}, {"response", {{"kind", "reply"}, {"text", "好的"}}}},
  };
  const auto r = augment(rows, ValidationRules::defaults(), {}, SftMode::decision, 1);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0]["id"] == "ok");
  CHECK(r.records[1]["id"] == "dec");
  REQUIRE(r.rejected.size() == 3);
  std::map<std::string, std::string> why;
  for (const auto& x : r.rejected) why[x.id] = x.reason;
  CHECK(why["leak"] == "validation");
  CHECK(why["broken"] == "parse_error");
  CHECK(why["gated"] == "qc_gate");
}
