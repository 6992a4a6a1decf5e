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

#include "cascade/cli/cli.hpp"

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <unordered_map>

#include "CLI11.hpp"
#include "cascade/calibrator/calibrate.hpp"
#include "cascade/io/errors.hpp"
#include "cascade/io/jsonl.hpp"
#include "cascade/judge/errors.hpp"
#include "cascade/multigt/expansion.hpp"
#include "cascade/service/http_server.hpp"
#include "cascade/service/reward_service.hpp"
#include "cascade/trace/sft.hpp"
#include "httplib.h"

namespace cascade::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

/// Calibration could not produce parameters.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw io::IoError(std::string(what) + " not found: " + p.string());
}

void require_parent(const fs::path& p) {
  const fs::path parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw io::IoError("output directory does not exist: " + parent.string());
  }
}

service::ServiceConfig load_config(const std::string& path) {
  if (path.empty()) return service::ServiceConfig::mock_defaults();
  require_file(path, "config");
  return service::ServiceConfig::load(path);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

struct Common {
  std::string config;
  unsigned long long seed = kDefaultSeed;
  int verbosity = 0;
};

// calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::string data, out;
  double tau_step = 0.05, w_step = 0.1;
  bool no_refine = false;
  unsigned threads = 0;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  require_file(a.data, "data file");
  require_parent(a.out);
  const auto data = calibrator::load_eval_instances(a.data);
  calibrator::CalibrationResult r;
  std::optional<calibrator::SearchGrid> grid;
  try {
    grid = calibrator::SearchGrid::uniform(a.tau_step, a.w_step);
    r = calibrator::fit_cascade(data, *grid, {!a.no_refine, a.threads});
  } catch (const std::invalid_argument& e) {
    throw CalibrationError(e.what());
  }
  calibrator::CalibrationArtifact art{r, grid->to_json(), calibrator::data_fingerprint(data),
                                      calibrator::timestamp_now()};
  art.grid["refine"] = !a.no_refine;
  calibrator::write_artifact(a.out, art);
  out << "calibrated on " << r.fit_set_size << " rows, " << r.grid_points_evaluated << " points: tau=["
      << r.params.tau_a() << ", " << r.params.tau_b() << "] w1=" << r.params.w1() << " w2=" << r.params.w2()
      << " rho=" << fmt("%.6f", r.rho) << (r.degenerate ? " (degenerate)" : "") << "\n";
  return kOk;
}

// score ------------------------------------------------------------------

struct ScoreArgs {
  std::string in, out, params;
  bool force_judge = false;
};

int cmd_score(const Common& c, const ScoreArgs& a, std::ostream& out) {
  require_file(a.in, "input");
  if (!a.out.empty()) require_parent(a.out);
  if (!a.params.empty()) require_file(a.params, "calibration artifact");
  auto config = load_config(c.config);
  if (!a.params.empty()) {
    config.params = calibrator::read_artifact(a.params).result.params;
  }
  auto svc = service::RewardService::from_config(config);

  ordered_json items = ordered_json::array();
  io::read_jsonl(a.in, [&](const ordered_json& row, std::size_t) {
    // Validate each row on its own so schema errors carry a line number.
    service::RewardRequest::from_json({{"items", ordered_json::array({row})}});
    items.push_back(row);
  });
  auto request = service::RewardRequest::from_json({{"items", items}});
  request.options.force_judge = a.force_judge;
  const auto response = svc->handle_batch(request);
  const ordered_json rj = response.to_json();

  std::size_t errors = 0;
  if (!a.out.empty()) {
    io::JsonlWriter w(a.out);
    for (const auto& it : rj["items"]) w.write(it);
    w.close();
  } else {
    for (const auto& it : rj["items"]) out << it.dump() << "\n";
  }
  for (const auto& it : response.items) errors += it.error.has_value();
  const auto stats = svc->stats_snapshot();
  out << "scored " << response.items.size() << " items (" << errors << " errors), fast_pass_fraction "
      << fmt("%.4f", response.batch_stats.fast_pass_fraction) << ", backend calls "
      << svc->backends().ledger().total_calls() << ", estimated time ratio "
      << fmt("%.4f", stats.estimated_time_ratio()) << "\n";
  if (c.config.empty()) out << "backends: built-in lexical mocks (pass --config for real endpoints)\n";
  if (errors) throw BackendFailure(std::to_string(errors) + " item(s) failed; see the output rows");
  return kOk;
}

// build-multigt ----------------------------------------------------------

struct MultiGtArgs {
  std::string refs, candidates, out, report, errors, split = "split";
  bool replay = false;
  unsigned threads = 0;
};

int cmd_build_multigt(const Common& c, const MultiGtArgs& a, std::ostream& out) {
  require_file(a.refs, "reference sets");
  require_file(a.candidates, "candidate batches");
  for (const auto* p : {&a.out, &a.report, &a.errors}) {
    if (!p->empty()) require_parent(*p);
  }
  std::vector<multigt::ReferenceSet> refsets;
  io::read_jsonl(a.refs, [&](const ordered_json& row, std::size_t) {
    refsets.push_back(multigt::ReferenceSet::from_json(row));
  });
  std::vector<multigt::CandidateBatch> batches;
  io::read_jsonl(a.candidates, [&](const ordered_json& row, std::size_t) {
    batches.push_back(multigt::CandidateBatch::from_json(row));
  });

  std::optional<service::BackendSet> backends;
  std::unique_ptr<multigt::AdmissionJudge> judge;
  if (a.replay) {
    judge = std::make_unique<multigt::ReplayJudge>();
  } else {
    backends.emplace(load_config(c.config));
    judge = std::make_unique<multigt::BackendAdmissionJudge>(*backends->consistency().front(),
                                                             backends->utility());
  }
  const auto run = multigt::expand_all(refsets, batches, *judge, a.threads);

  std::vector<multigt::ReferenceSet> expanded;
  std::vector<multigt::ExpansionError> errors = run.unmatched;
  for (const auto& r : run.results) {
    expanded.push_back(r.refs);
    errors.insert(errors.end(), r.errors.begin(), r.errors.end());
  }
  if (!a.out.empty()) {
    io::JsonlWriter w(a.out);
    for (const auto& rs : expanded) w.write(rs.to_json());
    w.close();
  }
  const auto stats = multigt::expansion_report(expanded, a.split);
  const std::string table = multigt::format_expansion_table(std::span(&stats, 1));
  if (!a.report.empty()) {
    io::write_text(a.report, table);
    io::write_text(a.report + ".json", stats.to_json().dump(2) + "\n");
  }
  if (!a.errors.empty() || !errors.empty()) {
    const std::string manifest = a.errors.empty() ? (a.out.empty() ? "multigt_errors.jsonl" : a.out + ".errors.jsonl") : a.errors;
    io::JsonlWriter w(manifest);
    for (const auto& e : errors) w.write(e.to_json());
    w.close();
    if (!errors.empty()) out << errors.size() << " candidate(s) failed; manifest: " << manifest << "\n";
  }
  out << table;
  return kOk;
}

// eval-ecs ---------------------------------------------------------------

struct EcsArgs {
  std::string refs, in, out;
};

int cmd_eval_ecs(const Common& c, const EcsArgs& a, std::ostream& out) {
  require_file(a.refs, "reference sets");
  require_file(a.in, "candidates");
  if (!a.out.empty()) require_parent(a.out);
  std::vector<multigt::ReferenceSet> refsets;
  std::unordered_map<std::string, std::size_t> by_query;
  io::read_jsonl(a.refs, [&](const ordered_json& row, std::size_t) {
    refsets.push_back(multigt::ReferenceSet::from_json(row));
    if (!by_query.emplace(refsets.back().query_id(), refsets.size() - 1).second) {
      throw std::invalid_argument("duplicate query_id " + refsets.back().query_id());
    }
  });
  struct Row {
    std::string id;
    std::size_t set;
    Candidate candidate;
  };
  std::vector<Row> rows;
  io::read_jsonl(a.in, [&](const ordered_json& row, std::size_t line) {
    const std::string q = row.at("query_id").get<std::string>();
    auto it = by_query.find(q);
    if (it == by_query.end()) throw std::invalid_argument("unknown query_id " + q);
    const std::string id = row.contains("id") ? row.at("id").get<std::string>() : std::to_string(line);
    rows.push_back({id, it->second, Candidate::from_json(row.at("candidate"))});
  });

  service::BackendSet backends(load_config(c.config));
  const judge::EnsembleScorer ensemble(backends.consistency());
  double multi_sum = 0.0, single_sum = 0.0;
  std::optional<io::JsonlWriter> w;
  if (!a.out.empty()) w.emplace(a.out);
  for (const auto& r : rows) {
    const auto& rs = refsets[r.set];
    Score multi, single;
    try {
      multi = multigt::ecs(rs.context(), r.candidate, rs, ensemble);
      single = multigt::single_reference_score(rs.context(), r.candidate, rs, ensemble);
    } catch (const judge::BackendError& e) {
      throw BackendFailure("item " + r.id + ": " + e.what());
    }
    multi_sum += multi.value();
    single_sum += single.value();
    const ordered_json j = {{"id", r.id}, {"query_id", rs.query_id()}, {"ecs", multi.value()}, {"single_ecs", single.value()}};
    if (w) {
      w->write(j);
    } else {
      out << j.dump() << "\n";
    }
  }
  if (w) w->close();
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  out << "items " << rows.size() << "  Multi-ECS " << fmt("%.4f", multi_sum / n) << "  Single-ECS "
      << fmt("%.4f", single_sum / n) << "\n";
  return kOk;
}

// augment ----------------------------------------------------------------

struct AugmentArgs {
  std::string in, out, violations, policy, mode = "decision";
  bool require_rationale = false;
};

int cmd_augment(const Common& c, const AugmentArgs& a, std::ostream& out) {
  require_file(a.in, "teacher outputs");
  require_parent(a.out);
  if (!a.violations.empty()) require_parent(a.violations);
  trace::QcPolicy policy;
  if (!a.policy.empty()) {
    require_file(a.policy, "QC policy");
    try {
      policy = trace::QcPolicy::from_json(ordered_json::parse(io::read_text(a.policy)));
    } catch (const std::exception& e) {
      throw io::SchemaError(a.policy, 0, e.what());
    }
  }
  auto rules = trace::ValidationRules::defaults();
  rules.require_rationale = a.require_rationale;
  const auto rows = io::read_jsonl(a.in);
  const auto result = trace::augment(rows, rules, policy, trace::sft_mode_from_string(a.mode), c.seed);
  io::JsonlWriter w(a.out);
  for (const auto& r : result.records) w.write(r);
  w.close();
  if (!a.violations.empty()) {
    io::JsonlWriter v(a.violations);
    for (const auto& r : result.rejected) v.write(r.to_json());
    v.close();
  }
  out << "emitted " << result.records.size() << " records, rejected " << result.rejected.size() << " (mode "
      << a.mode << ", seed " << c.seed << ")\n";
  return kOk;
}

// serve / stats ----------------------------------------------------------

struct ServeArgs {
  std::string host;
  int port = -1;
};

service::HttpServer* g_server = nullptr;

int cmd_serve(const Common& c, const ServeArgs& a, std::ostream& out) {
  auto config = load_config(c.config);
  if (!a.host.empty()) config.host = a.host;
  if (a.port >= 0) config.port = a.port;
  auto svc = service::RewardService::from_config(config);
  service::HttpServer server(*svc);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  out << "serving on " << config.host << ":" << config.port << "\n" << std::flush;
  server.listen(config.host, config.port);
  g_server = nullptr;
  return kOk;
}

int cmd_stats(const std::string& url, std::ostream& out) {
  httplib::Client client(url);
  client.set_connection_timeout(5);
  auto res = client.Get("/v1/stats");
  if (!res) throw BackendFailure("cannot reach " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendFailure(url + " answered HTTP " + std::to_string(res->status));
  out << ordered_json::parse(res->body).dump(2) << "\n";
  return kOk;
}

int report(std::ostream& err, int code, const char* cls, const std::string& message) {
  err << ordered_json{{"error", {{"code", code}, {"class", cls}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascade reward serving and Multi-GT curation toolkit", "cascade"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "Backend/service configuration file (JSON)");
  app.add_option("--seed", common.seed, "Seed for deterministic shuffles")->capture_default_str();
  app.add_flag("-v,--verbose", common.verbosity, "More output");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Fit cascade parameters on held-out scores");
  c_cal->add_option("--data", cal.data, "EvalInstance JSONL")->required();
  c_cal->add_option("--out", cal.out, "Calibration artifact to write")->required();
  c_cal->add_option("--tau-step", cal.tau_step, "Threshold grid step")->capture_default_str();
  c_cal->add_option("--w-step", cal.w_step, "Weight grid step")->capture_default_str();
  c_cal->add_flag("--no-refine", cal.no_refine, "Skip the half-step refinement pass");
  c_cal->add_option("--threads", cal.threads, "Worker threads (0 = all cores)");

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "Offline batch rewards, JSONL in and out");
  c_score->add_option("--in", sc.in, "Reward items JSONL")->required();
  c_score->add_option("--out", sc.out, "Output JSONL (default stdout)");
  c_score->add_option("--params", sc.params, "Calibration artifact");
  c_score->add_flag("--force-judge", sc.force_judge, "Judge every reply (audit mode)");

  MultiGtArgs mg;
  auto* c_mg = app.add_subcommand("build-multigt", "Expand reference sets with dual filtering");
  c_mg->add_option("--refs", mg.refs, "Reference sets JSONL")->required();
  c_mg->add_option("--candidates", mg.candidates, "Candidate batches JSONL")->required();
  c_mg->add_option("--out", mg.out, "Expanded reference sets JSONL");
  c_mg->add_option("--report", mg.report, "Expansion table (JSON written alongside)");
  c_mg->add_option("--errors", mg.errors, "Error manifest JSONL");
  c_mg->add_option("--split", mg.split, "Split name for the report")->capture_default_str();
  c_mg->add_flag("--replay", mg.replay, "Use recorded verdicts instead of backends");
  c_mg->add_option("--threads", mg.threads, "Worker threads (0 = all cores)");

  EcsArgs ecs;
  auto* c_ecs = app.add_subcommand("eval-ecs", "Per-item ECS and aggregate Multi-/Single-ECS");
  c_ecs->add_option("--refs", ecs.refs, "Reference sets JSONL")->required();
  c_ecs->add_option("--in", ecs.in, "Candidates JSONL {id, query_id, candidate}")->required();
  c_ecs->add_option("--out", ecs.out, "Per-item output JSONL (default stdout)");

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Validate, gate and emit SFT records");
  c_aug->add_option("--in", aug.in, "Teacher outputs JSONL")->required();
  c_aug->add_option("--out", aug.out, "SFT records JSONL")->required();
  c_aug->add_option("--mode", aug.mode, "decision | mix")->check(CLI::IsMember({"decision", "mix"}))->capture_default_str();
  c_aug->add_option("--violations", aug.violations, "Rejection manifest JSONL");
  c_aug->add_option("--policy", aug.policy, "QC policy JSON {\"waived\": [...]}");
  c_aug->add_flag("--require-rationale", aug.require_rationale, "Reject records without a rationale");

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP reward service");
  c_serve->add_option("--host", sv.host, "Bind address (overrides config)");
  c_serve->add_option("--port", sv.port, "Port (overrides config)");

  std::string stats_url = "http://127.0.0.1:8080";
  auto* c_stats = app.add_subcommand("stats", "Print a running service's statistics");
  c_stats->add_option("--url", stats_url, "Service base URL")->capture_default_str();

  // CLI11 consumes arguments in reverse and without the program name.
  std::vector<std::string> rev;
  if (!args.empty()) rev.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kUsage, "usage", e.what());
  }

  try {
    if (*c_cal) return cmd_calibrate(cal, out);
    if (*c_score) return cmd_score(common, sc, out);
    if (*c_mg) return cmd_build_multigt(common, mg, out);
    if (*c_ecs) return cmd_eval_ecs(common, ecs, out);
    if (*c_aug) return cmd_augment(common, aug, out);
    if (*c_serve) return cmd_serve(common, sv, out);
    if (*c_stats) return cmd_stats(stats_url, out);
    return report(err, kUsage, "usage", "no subcommand");
  } catch (const io::IoError& e) {
    return report(err, kIo, "io", e.what());
  } catch (const io::SchemaError& e) {
    return report(err, kSchema, "schema", e.what());
  } catch (const CalibrationError& e) {
    return report(err, kCalibration, "calibration", e.what());
  } catch (const BackendFailure& e) {
    return report(err, kBackend, "backend", e.what());
  } catch (const judge::BackendError& e) {
    return report(err, kBackend, "backend", e.what());
  } catch (const ScoringError& e) {
    return report(err, kBackend, "backend", e.what());
  } catch (const service::RequestError& e) {
    return report(err, kSchema, "schema", e.what());
  } catch (const std::invalid_argument& e) {
    return report(err, kSchema, "schema", e.what());
  } catch (const std::exception& e) {
    return report(err, kInternal, "internal", e.what());
  }
}

}  // namespace cascade::cli
