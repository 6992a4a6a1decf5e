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

#include "cascade/judge/mock.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <stdexcept>

#include "cascade/io/jsonl.hpp"

namespace cascade::judge {

using nlohmann::ordered_json;

std::string MockTransport::post(const BackendDescriptor& backend, const std::string& body) {
  requests_.fetch_add(1);
  ordered_json request;
  try {
    request = ordered_json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(BackendErrorKind::transport, backend.name,
                       std::string("mock received non-JSON body: ") + e.what());
  }
  return handler_(backend, request);
}

namespace mock {
namespace {

std::string text_field(const ordered_json& req, const char* key) {
  auto it = req.find(key);
  return it != req.end() && it->is_string() ? it->get<std::string>() : std::string();
}

// ASCII alphanumeric runs (lowercased) and single non-ASCII code points.
std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      if (std::isalnum(c)) {
        word += static_cast<char>(std::tolower(c));
      } else {
        flush();
      }
      ++i;
      continue;
    }
    flush();
    std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
    len = std::min(len, s.size() - i);
    const std::string cp(s.substr(i, len));
    // Fullwidth punctuation carries no content.
    if (cp != "，" && cp != "。" && cp != "！" && cp != "？" && cp != "、" && cp != "：" &&
        cp != "；") {
      out.push_back(cp);
    }
    i += len;
  }
  flush();
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BackendMode request_mode(const BackendDescriptor& d, const ordered_json& req) {
  const std::string m = text_field(req, "mode");
  return m.empty() ? d.mode : backend_mode_from_string(m);
}

ordered_json verdict(const char* label) { return {{"verdict", {{"judge_result", label}}}}; }

}  // namespace

double token_jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokens(a), tb = tokens(b);
  return jaccard({ta.begin(), ta.end()}, {tb.begin(), tb.end()});
}

double bigram_jaccard(std::string_view a, std::string_view b) {
  auto grams = [](std::string_view s) {
    const auto t = tokens(s);
    std::set<std::string> g;
    if (t.size() == 1) g.insert(t[0]);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) g.insert(t[i] + "\x1f" + t[i + 1]);
    return g;
  };
  return jaccard(grams(a), grams(b));
}

MockHandler always_yes() {
  return [](const BackendDescriptor& d, const ordered_json& req) -> std::string {
    switch (request_mode(d, req)) {
      case BackendMode::reranker:
        return R"({"score":1.0})";
      case BackendMode::soft_judge:
        return R"({"probabilities":{"yes":1.0,"part":0.0,"no":0.0}})";
      case BackendMode::consistency:
        return verdict("一致").dump();
      case BackendMode::utility:
        return verdict("可用").dump();
    }
    return "{}";
  };
}

MockHandler constant(ordered_json response) {
  const std::string body = response.dump();
  return [body](const BackendDescriptor&, const ordered_json&) { return body; };
}

MockHandler keyed(std::vector<KeyedEntry> entries, ordered_json fallback) {
  auto table = std::make_shared<const std::vector<KeyedEntry>>(std::move(entries));
  const std::string fb = fallback.is_null() ? std::string() : fallback.dump();
  return [table, fb](const BackendDescriptor& d, const ordered_json& req) -> std::string {
    const std::string cand = text_field(req, "candidate");
    const std::string ref = text_field(req, "reference");
    const KeyedEntry* loose = nullptr;
    for (const auto& e : *table) {
      if (e.candidate != cand) continue;
      if (e.reference == ref) return e.response.dump();
      if (e.reference.empty() && !loose) loose = &e;
    }
    if (loose) return loose->response.dump();
    if (!fb.empty()) return fb;
    throw BackendError(BackendErrorKind::transport, d.name, "mock has no entry for candidate");
  };
}

MockHandler reranker_fixture(const std::filesystem::path& fixture_json) {
  const auto doc = ordered_json::parse(io::read_text(fixture_json));
  std::vector<KeyedEntry> entries;
  for (const auto& p : doc.at("pairs")) {
    const ordered_json response = {{"score", p.at("reranker_score")}};
    const auto s1 = p.at("statement1").get<std::string>();
    const auto s2 = p.at("statement2").get<std::string>();
    entries.push_back({s1, s2, response});
    entries.push_back({s2, s1, response});
  }
  return keyed(std::move(entries));
}

MockHandler lexical() {
  return [](const BackendDescriptor& d, const ordered_json& req) -> std::string {
    const std::string cand = text_field(req, "candidate");
    const std::string ref = text_field(req, "reference");
    switch (request_mode(d, req)) {
      case BackendMode::reranker:
        return ordered_json{{"score", token_jaccard(cand, ref)}}.dump();
      case BackendMode::soft_judge: {
        const double k = bigram_jaccard(cand, ref);
        return ordered_json{{"probabilities",
                             {{"yes", k * k}, {"part", 2.0 * k * (1.0 - k)}, {"no", (1.0 - k) * (1.0 - k)}}}}
            .dump();
      }
      case BackendMode::consistency: {
        const double k = bigram_jaccard(cand, ref);
        return verdict(k >= 0.6 ? "一致" : k >= 0.3 ? "部分一致" : "不一致").dump();
      }
      case BackendMode::utility: {
        const std::string summary = text_field(req, "ticket_summary");
        const double j = std::max(token_jaccard(cand, summary.empty() ? ref : summary),
                                  token_jaccard(cand, ref));
        return verdict(j >= 0.2 ? "可用" : "不可用").dump();
      }
    }
    return "{}";
  };
}

MockHandler scripted(std::vector<std::string> responses) {
  if (responses.empty()) throw std::invalid_argument("scripted mock needs at least one response");
  struct State {
    std::mutex mu;
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  auto st = std::make_shared<State>();
  st->responses = std::move(responses);
  return [st](const BackendDescriptor&, const ordered_json&) {
    std::lock_guard lock(st->mu);
    const std::size_t i = std::min(st->next, st->responses.size() - 1);
    ++st->next;
    return st->responses[i];
  };
}

MockHandler failing(int n, BackendErrorKind kind, MockHandler then) {
  auto remaining = std::make_shared<std::atomic<int>>(n);
  return [remaining, kind, then](const BackendDescriptor& d, const ordered_json& req) {
    if (remaining->fetch_sub(1) > 0) throw BackendError(kind, d.name, "injected failure");
    return then(d, req);
  };
}

MockHandler from_config(const ordered_json& spec, const std::filesystem::path& base_dir) {
  const std::string kind = spec.at("kind").get<std::string>();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (kind == "always_yes") return always_yes();
  if (kind == "lexical") return lexical();
  if (kind == "constant") return constant(spec.at("response"));
  if (kind == "scripted") {
    std::vector<std::string> bodies;
    for (const auto& r : spec.at("responses")) bodies.push_back(r.is_string() ? r.get<std::string>() : r.dump());
    return scripted(std::move(bodies));
  }
  if (kind == "keyed") {
    std::vector<KeyedEntry> entries;
    for (const auto& e : spec.at("entries")) {
      entries.push_back({e.at("candidate").get<std::string>(), e.value("reference", std::string()),
                         e.at("response")});
    }
    return keyed(std::move(entries), spec.value("fallback", ordered_json()));
  }
  if (kind == "reranker_fixture") return reranker_fixture(resolve(spec.at("path").get<std::string>()));
  if (kind == "failing") {
    const std::string err = spec.value("error", std::string("transport"));
    const BackendErrorKind ek = err == "timeout"             ? BackendErrorKind::timeout
                                : err == "malformed_payload" ? BackendErrorKind::malformed_payload
                                                             : BackendErrorKind::transport;
    return failing(spec.at("n").get<int>(), ek, from_config(spec.at("then"), base_dir));
  }
  throw std::invalid_argument("unknown mock kind: " + kind);
}

}  // namespace mock
}  // namespace cascade::judge
