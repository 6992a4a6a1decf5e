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

#include "cascade/multigt/expansion.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace cascade::multigt {

using nlohmann::ordered_json;

Score ecs(std::string_view context, const Candidate& candidate, const ReferenceSet& refs,
          const PairScorer& ensemble) {
  const std::string cand = candidate.judge_text();
  Score best = Score::zero();
  for (const auto& r : refs.references()) {
    best = std::max(best, ensemble.score(context, cand, r.candidate.judge_text()));
  }
  return best;
}

Score single_reference_score(std::string_view context, const Candidate& candidate,
                             const ReferenceSet& refs, const PairScorer& ensemble) {
  return ensemble.score(context, candidate.judge_text(), refs.logged_original().candidate.judge_text());
}

bool BackendAdmissionJudge::consistent(const ReferenceSet& refs, const BatchCandidate& c,
                                       const Reference& against) const {
  const auto v = judge::consistency_verdict(consistency_, refs.context(), c.candidate.judge_text(),
                                            against.candidate.judge_text());
  return v.level == judge::ConsistencyLevel::consistent;
}

bool BackendAdmissionJudge::useful(const ReferenceSet& refs, const BatchCandidate& c) const {
  if (!refs.ticket_summary()) {
    throw std::invalid_argument("query " + refs.query_id() + " has no ticket_summary for the utility judge");
  }
  return judge::utility_pass(utility_, refs.context(), c.candidate.judge_text(), *refs.ticket_summary(),
                             refs.logged_original().candidate.judge_text());
}

bool ReplayJudge::consistent(const ReferenceSet& refs, const BatchCandidate& c, const Reference&) const {
  if (!c.recorded.consistent) {
    throw std::invalid_argument("query " + refs.query_id() + ": candidate has no recorded consistency verdict");
  }
  return *c.recorded.consistent;
}

bool ReplayJudge::useful(const ReferenceSet& refs, const BatchCandidate& c) const {
  if (!c.recorded.useful) {
    throw std::invalid_argument("query " + refs.query_id() + ": candidate has no recorded utility verdict");
  }
  return *c.recorded.useful;
}

FilterDecision dual_filter(const ReferenceSet& refs, const BatchCandidate& c, Origin origin,
                           const AdmissionJudge& judge) {
  for (const auto& r : refs.references()) {
    if (judge.consistent(refs, c, r)) {
      return {true, origin == Origin::online_rollout ? SourceTag::online_consistency
                                                     : SourceTag::offline_consistency};
    }
  }
  if (judge.useful(refs, c)) return {true, SourceTag::utility};
  return {false, std::nullopt};
}

ordered_json ExpansionError::to_json() const {
  return {{"query_id", query_id},
          {"batch_index", batch_index},
          {"candidate_index", candidate_index},
          {"error", error}};
}

ExpansionResult expand_reference_set(const ReferenceSet& refs, std::span<const CandidateBatch> batches,
                                     const AdmissionJudge& judge) {
  ExpansionResult out{refs, {}, 0, 0};
  struct Pending {
    std::size_t batch, cand;
  };
  std::vector<Pending> pending;

  auto attempt = [&](std::size_t b, std::size_t i, std::string* error) {
    const auto& batch = batches[b];
    const auto& c = batch.candidates[i];
    if (out.refs.contains(c.candidate)) {
      ++out.skipped_duplicates;
      return true;
    }
    try {
      const FilterDecision d = dual_filter(out.refs, c, batch.origin, judge);
      if (d.accepted) {
        out.refs.add({c.candidate, *d.tag});
      } else {
        ++out.rejected;
      }
      return true;
    } catch (const std::exception& e) {
      if (error) *error = e.what();
      return false;
    }
  };

  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (batches[b].query_id != refs.query_id()) {
      throw std::invalid_argument("batch for query " + batches[b].query_id + " passed to " + refs.query_id());
    }
    for (std::size_t i = 0; i < batches[b].candidates.size(); ++i) {
      if (!attempt(b, i, nullptr)) pending.push_back({b, i});
    }
  }
  for (const auto& p : pending) {
    std::string error;
    if (!attempt(p.batch, p.cand, &error)) out.errors.push_back({refs.query_id(), p.batch, p.cand, error});
  }
  return out;
}

ExpansionRun expand_all(std::span<const ReferenceSet> refsets,
                                        std::span<const CandidateBatch> batches,
                                        const AdmissionJudge& judge, unsigned threads) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < refsets.size(); ++i) {
    if (!index.emplace(refsets[i].query_id(), i).second) {
      throw std::invalid_argument("duplicate reference set for query " + refsets[i].query_id());
    }
  }
  std::vector<std::vector<CandidateBatch>> grouped(refsets.size());
  std::vector<ExpansionError> orphans;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    auto it = index.find(batches[b].query_id);
    if (it == index.end()) {
      orphans.push_back({batches[b].query_id, b, 0, "candidate batch names an unknown query"});
      continue;
    }
    grouped[it->second].push_back(batches[b]);
  }

  std::vector<std::optional<ExpansionResult>> slots(refsets.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < refsets.size();) {
      slots[i] = expand_reference_set(refsets[i], grouped[i], judge);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, refsets.size())));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExpansionRun out;
  out.results.reserve(refsets.size());
  for (auto& s : slots) out.results.push_back(std::move(*s));
  out.unmatched = std::move(orphans);
  return out;
}

ExpansionStats expansion_report(std::span<const ReferenceSet> refsets, std::string split_name) {
  ExpansionStats s;
  s.split_name = std::move(split_name);
  s.n_queries = refsets.size();
  for (SourceTag t : {SourceTag::online_consistency, SourceTag::offline_consistency, SourceTag::utility}) {
    s.by_source[t] = 0;
  }
  for (const auto& rs : refsets) {
    for (const auto& r : rs.references()) {
      ++s.multi_gt;
      if (r.tag == SourceTag::logged_original) {
        ++s.single_gt;
      } else {
        ++s.by_source[r.tag];
      }
    }
  }
  s.added = s.multi_gt - s.single_gt;
  s.expand_pct = s.single_gt ? 100.0 * static_cast<double>(s.added) / static_cast<double>(s.single_gt) : 0.0;
  return s;
}

ordered_json ExpansionStats::to_json() const {
  ordered_json by = ordered_json::object();
  for (const auto& [tag, n] : by_source) by[std::string(to_string(tag))] = n;
  char pct[32];
  std::snprintf(pct, sizeof(pct), "%.2f", expand_pct);
  return {{"split", split_name},   {"n_queries", n_queries}, {"single_gt", single_gt},
          {"multi_gt", multi_gt},  {"added", added},         {"by_source", by},
          {"expand_pct", expand_pct}, {"expand_pct_2dp", pct}};
}

std::string format_expansion_table(std::span<const ExpansionStats> rows) {
  static const char* kHeader[] = {"Split",         "#Queries",           "Single-GT",
                                  "Multi-GT",      "+Added",             "Con. Judge(online)",
                                  "Con. Judge(offline)", "Utility Judge", "Expand %"};
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(std::begin(kHeader), std::end(kHeader));
  for (const auto& r : rows) {
    auto at = [&](SourceTag t) {
      auto it = r.by_source.find(t);
      return std::to_string(it == r.by_source.end() ? 0 : it->second);
    };
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.2f", r.expand_pct);
    cells.push_back({r.split_name, std::to_string(r.n_queries), std::to_string(r.single_gt),
                     std::to_string(r.multi_gt), std::to_string(r.added), at(SourceTag::online_consistency),
                     at(SourceTag::offline_consistency), at(SourceTag::utility), pct});
  }
  std::vector<std::size_t> width(std::size(kHeader), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : pad + row[c];  // split left, numbers right
      out += c + 1 < row.size() ? "  " : "\n";
    }
  }
  return out;
}

}  // namespace cascade::multigt
