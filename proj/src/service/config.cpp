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

#include "cascade/service/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>

#include "cascade/calibrator/calibrate.hpp"
#include "cascade/io/errors.hpp"
#include "cascade/io/jsonl.hpp"
#include "cascade/judge/mock.hpp"

namespace cascade::service {

using nlohmann::ordered_json;

namespace {

std::string env_name(const std::string& backend, const char* suffix) {
  std::string out = "CASCADE_";
  for (char c : backend) out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_';
  return out + "_" + suffix;
}

const char* default_template(judge::BackendMode mode) {
  switch (mode) {
    case judge::BackendMode::reranker:
      return "reranker";
    case judge::BackendMode::soft_judge:
    case judge::BackendMode::consistency:
      return "consistency_judge";
    case judge::BackendMode::utility:
      return "utility_judge";
  }
  return "";
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

BackendSpec backend_spec_from_json(const std::string& name, const ordered_json& j, judge::BackendMode default_mode,
                                   double default_weight) {
  if (!j.is_object()) throw std::invalid_argument("backend " + name + " must be a JSON object");
  BackendSpec spec;
  auto& d = spec.descriptor;
  d.name = j.value("name", name);
  d.mode = j.contains("mode") ? judge::backend_mode_from_string(j.at("mode").get<std::string>()) : default_mode;
  d.endpoint = j.value("endpoint", std::string());
  d.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
  d.max_in_flight = j.value("max_in_flight", 8);
  d.nominal_latency_weight = j.value("latency_weight", default_weight);
  d.prompt_template = j.value("prompt_template", std::string(default_template(d.mode)));
  if (auto token_env = j.find("auth_token_env"); token_env != j.end()) {
    if (const char* v = std::getenv(token_env->get<std::string>().c_str())) d.auth_token = v;
  }
  if (const char* v = std::getenv(env_name(name, "ENDPOINT").c_str())) d.endpoint = v;
  if (const char* v = std::getenv(env_name(name, "TOKEN").c_str())) d.auth_token = v;
  if (d.endpoint.rfind("mock://", 0) == 0) {
    spec.mock = j.contains("mock") ? j.at("mock") : ordered_json{{"kind", d.endpoint.substr(7)}};
  } else if (d.endpoint.empty()) {
    throw std::invalid_argument("backend " + name + " has no endpoint");
  }
  d.validate();
  return spec;
}

ServiceConfig ServiceConfig::from_json(const ordered_json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ServiceConfig c;
  c.base_dir = base_dir;
  c.prompts_dir = judge::PromptLibrary::default_assets_dir() / "prompts";
  if (auto it = j.find("prompts_dir"); it != j.end()) c.prompts_dir = resolve(base_dir, it->get<std::string>());
  if (auto b = j.find("backends"); b != j.end()) {
    if (!b->is_object()) throw std::invalid_argument("\"backends\" must be an object");
    if (b->contains("reranker")) {
      c.reranker = backend_spec_from_json("reranker", b->at("reranker"), judge::BackendMode::reranker, 1.0);
    }
    if (b->contains("judge")) {
      c.judge = backend_spec_from_json("judge", b->at("judge"), judge::BackendMode::soft_judge, 10.0);
    }
    if (b->contains("utility")) {
      c.utility = backend_spec_from_json("utility", b->at("utility"), judge::BackendMode::utility, 10.0);
    }
    if (auto cons = b->find("consistency"); cons != b->end()) {
      const ordered_json list = cons->is_array() ? *cons : ordered_json::array({*cons});
      for (std::size_t i = 0; i < list.size(); ++i) {
        c.consistency.push_back(backend_spec_from_json("consistency_" + std::to_string(i), list[i],
                                                       judge::BackendMode::consistency, 10.0));
      }
    }
  }
  if (auto r = j.find("retry"); r != j.end()) {
    c.retry.max_retries = r->value("max_retries", c.retry.max_retries);
    c.retry.base_delay = std::chrono::milliseconds(r->value("base_delay_ms", 50));
    c.retry.retry_timeout = r->value("retry_timeout", true);
    c.retry.retry_transport = r->value("retry_transport", true);
    c.retry.retry_malformed = r->value("retry_malformed", true);
  }
  if (auto p = j.find("params"); p != j.end()) c.params = calibrator::params_from_json(*p);
  if (auto p = j.find("params_path"); p != j.end()) c.params_path = resolve(base_dir, p->get<std::string>());
  if (auto p = j.find("cache_path"); p != j.end()) c.cache_path = resolve(base_dir, p->get<std::string>());
  c.item_workers = j.value("item_workers", 0u);
  if (auto l = j.find("listen"); l != j.end()) {
    c.host = l->value("host", c.host);
    c.port = l->value("port", c.port);
  }
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw io::SchemaError(path.string(), 0, std::string("config is not JSON: ") + e.what());
  }
  try {
    return from_json(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw io::SchemaError(path.string(), 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw io::SchemaError(path.string(), 0, e.what());
  }
}

ServiceConfig ServiceConfig::mock_defaults() {
  const ordered_json lexical = {{"endpoint", "mock://lexical"}};
  return from_json({{"backends",
                     {{"reranker", lexical},
                      {"judge", lexical},
                      {"utility", lexical},
                      {"consistency", ordered_json::array({lexical, lexical, lexical, lexical})}}},
                    {"params", calibrator::params_to_json(CascadeParams::reference())}});
}

BackendSet::BackendSet(const ServiceConfig& config)
    : base_dir_(config.base_dir), retry_(config.retry), ledger_(std::make_shared<judge::CallLedger>()) {
  if (std::filesystem::is_directory(config.prompts_dir)) {
    prompts_ = std::make_shared<const judge::PromptLibrary>(judge::PromptLibrary::load(config.prompts_dir));
  }
  // Mock specs change answers without changing the descriptor.
  for (const auto* spec : {config.reranker ? &*config.reranker : nullptr, config.judge ? &*config.judge : nullptr}) {
    mock_fingerprint_ += (spec && !spec->mock.is_null()) ? spec->mock.dump() : "-";
    mock_fingerprint_ += '#';
  }
  if (config.reranker) reranker_ = make(*config.reranker);
  if (config.judge) judge_ = make(*config.judge);
  if (config.utility) utility_ = make(*config.utility);
  for (const auto& spec : config.consistency) consistency_.push_back(make(spec));
}

std::unique_ptr<judge::BackendClient> BackendSet::make(const BackendSpec& spec) const {
  std::shared_ptr<judge::Transport> transport;
  if (!spec.mock.is_null()) {
    transport = std::make_shared<judge::MockTransport>(judge::mock::from_config(spec.mock, base_dir_));
  } else {
    transport = judge::make_http_transport();
  }
  auto desc = spec.descriptor;
  if (prompts_ && !desc.prompt_template.empty() && !prompts_->contains(desc.prompt_template)) {
    throw std::invalid_argument("backend " + desc.name + ": unknown prompt template " + desc.prompt_template);
  }
  return std::make_unique<judge::BackendClient>(desc, transport, ledger_, retry_, prompts_);
}

namespace {
const judge::BackendClient& need(const std::unique_ptr<judge::BackendClient>& p, const char* what) {
  if (!p) throw std::invalid_argument(std::string("config defines no ") + what + " backend");
  return *p;
}
}  // namespace

const judge::BackendClient& BackendSet::reranker() const { return need(reranker_, "reranker"); }
const judge::BackendClient& BackendSet::judge() const { return need(judge_, "judge"); }
const judge::BackendClient& BackendSet::utility() const { return need(utility_, "utility"); }

std::vector<const judge::BackendClient*> BackendSet::consistency() const {
  if (consistency_.empty()) throw std::invalid_argument("config defines no consistency backends");
  std::vector<const judge::BackendClient*> out;
  for (const auto& c : consistency_) out.push_back(c.get());
  return out;
}

std::string BackendSet::scoring_fingerprint() const {
  return (reranker_ ? reranker_->descriptor().fingerprint() : std::string("-")) + "#" +
         (judge_ ? judge_->descriptor().fingerprint() : std::string("-")) + "#" + mock_fingerprint_;
}

std::map<std::string, double> BackendSet::latency_weights() const {
  std::map<std::string, double> out;
  for (const auto* p : {reranker_.get(), judge_.get(), utility_.get()}) {
    if (p) out[p->descriptor().name] = p->descriptor().nominal_latency_weight;
  }
  for (const auto& c : consistency_) out[c->descriptor().name] = c->descriptor().nominal_latency_weight;
  return out;
}

}  // namespace cascade::service
