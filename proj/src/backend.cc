/* Copyright 2026 The Clozener Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "clozener/backend.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <regex>
#include <set>
#include <thread>

#include "clozener/error.h"
#include "clozener/hash.h"
#include "httplib.h"
#include "json.hpp"

namespace clozener {
namespace {

void check_mode(PromptMode backend_mode, const Prompt& prompt) {
  if (prompt.mode != backend_mode) {
    throw ConfigError(std::string("prompt mode ") + to_string(prompt.mode) +
                      " does not match backend mode " + to_string(backend_mode));
  }
}

void validate_word_probs(const std::map<std::string, double>& probs, const std::string& where) {
  double sum = 0.0;
  for (const auto& [word, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError(where + ": probability of '" + word + "' outside [0,1]");
    }
    sum += p;
  }
  if (sum > 1.0 + kProbabilitySumSlack) {
    throw ValidationError(where + ": probabilities sum to more than 1");
  }
}

// RAII slot in the in-flight cap.
class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

double MaskDistribution::prob(const std::string& word) const {
  auto it = probs.find(word);
  return it == probs.end() ? 0.0 : it->second;
}

void MaskDistribution::validate() const {
  try {
    validate_word_probs(probs, "mask distribution");
  } catch (const ValidationError& e) {
    throw ProtocolError(e.what());
  }
}

void BackendConfig::validate() const {
  if (kind == BackendKind::kHttp && endpoint.empty()) {
    throw ConfigError("http backend requires an endpoint");
  }
  if (kind == BackendKind::kStub && fixtures.empty()) {
    throw ConfigError("stub backend requires a fixtures file");
  }
  if (mode == PromptMode::kMasked && mask_sentinel.empty()) {
    throw ConfigError("masked backend requires a non-empty mask sentinel");
  }
  if (max_in_flight == 0) throw ConfigError("max_in_flight must be >= 1");
  if (top_k == 0) throw ConfigError("top_k must be >= 1");
}

StubBackend::StubBackend(Table table, PromptMode mode, std::string mask_sentinel)
    : table_(std::move(table)), mode_(mode), mask_sentinel_(std::move(mask_sentinel)) {
  std::string canonical;
  for (const auto& [prompt, probs] : table_) {
    validate_word_probs(probs, "fixture '" + prompt + "'");
    canonical += prompt;
    canonical += '\n';
    for (const auto& [word, p] : probs) {
      canonical += word + '=' + std::to_string(p) + ';';
    }
    canonical += '\n';
  }
  model_id_ = "stub-" + fnv1a_hex(canonical);
}

MaskDistribution StubBackend::fill(const Prompt& prompt, Candidates candidates) const {
  check_mode(mode_, prompt);
  auto it = table_.find(prompt.text);
  if (it == table_.end()) throw MissingFixtureError("no stub fixture for prompt \"" + prompt.text + "\"");

  MaskDistribution dist;
  dist.prompt_echo = prompt.text;
  if (!candidates) {
    dist.probs = it->second;
    return dist;
  }
  for (const auto& word : *candidates) {
    auto hit = it->second.find(word);
    dist.probs[word] = hit == it->second.end() ? 0.0 : hit->second;
  }
  return dist;
}

std::unique_ptr<StubBackend> stub_load(std::istream& fixtures, PromptMode mode,
                                       std::string mask_sentinel) {
  const std::string text{std::istreambuf_iterator<char>(fixtures),
                         std::istreambuf_iterator<char>()};
  StubBackend::Table table;
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("stub fixtures: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("stub fixtures: top level must be an object");
    for (const auto& [prompt, words] : doc.items()) {
      if (!words.is_object()) {
        throw ValidationError("stub fixtures: entry for \"" + prompt + "\" must be an object");
      }
      auto& row = table[prompt];
      for (const auto& [word, p] : words.items()) {
        if (!p.is_number()) {
          throw ValidationError("stub fixtures: non-numeric probability for '" + word + "'");
        }
        row[word] = p.get<double>();
      }
    }
  }
  return std::make_unique<StubBackend>(std::move(table), mode, std::move(mask_sentinel));
}

std::unique_ptr<StubBackend> stub_load_file(const std::string& path, PromptMode mode,
                                            std::string mask_sentinel) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open stub fixture file '" + path + "'");
  return stub_load(in, mode, std::move(mask_sentinel));
}

MaskDistribution parse_fill_response(std::string_view body, Candidates candidates,
                                     std::string prompt_echo, std::string* model) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array()) {
    throw ProtocolError("malformed response: missing 'tokens' array");
  }

  std::set<std::string> allowed;
  if (candidates) allowed.insert(candidates->begin(), candidates->end());

  MaskDistribution dist;
  dist.prompt_echo = std::move(prompt_echo);
  for (const auto& entry : doc["tokens"]) {
    if (!entry.is_object() || !entry.contains("token") || !entry["token"].is_string() ||
        !entry.contains("prob") || !entry["prob"].is_number()) {
      throw ProtocolError("malformed response: token entries need 'token' and 'prob'");
    }
    const std::string word = entry["token"].get<std::string>();
    const double p = entry["prob"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ProtocolError("response probability for '" + word + "' outside [0,1]");
    }
    if (candidates && !allowed.count(word)) {
      throw ProtocolError("response contains non-candidate word '" + word + "'");
    }
    dist.probs[word] = p;
  }
  if (candidates) {
    for (const auto& word : *candidates) dist.probs.try_emplace(word, 0.0);
  }
  dist.validate();
  if (model && doc.contains("model") && doc["model"].is_string()) {
    *model = doc["model"].get<std::string>();
  }
  return dist;
}

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(config_.max_in_flight, 1))) {
  if (config_.endpoint.empty()) throw ConfigError("http backend requires an endpoint");
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw ConfigError("invalid backend endpoint '" + config_.endpoint + "'");
  }
  host_ = m[1].str();
  path_prefix_ = m[2].str();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

HttpBackend::~HttpBackend() = default;

MaskDistribution HttpBackend::fill(const Prompt& prompt, Candidates candidates) const {
  check_mode(config_.mode, prompt);

  nlohmann::json request;
  std::string path;
  if (config_.mode == PromptMode::kMasked) {
    path = path_prefix_ + "/v1/fill-mask";
    request["text"] = prompt.text;
    request["mask_sentinel"] = config_.mask_sentinel;
  } else {
    path = path_prefix_ + "/v1/next-word";
    request["context"] = prompt.text;
  }
  request["top_k"] = config_.top_k;
  if (candidates) {
    request["candidates"] = std::vector<std::string>(candidates->begin(), candidates->end());
  } else {
    request["candidates"] = nullptr;
  }
  const std::string body = request.dump();

  std::string last_failure;
  for (unsigned attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1u << (attempt - 1)));

    httplib::Result res;
    {
      InFlightSlot slot(in_flight_);
      httplib::Client client(host_);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      res = client.Post(path, body, "application/json");
    }

    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw ProtocolError("backend rejected request with HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    }
    std::string model;
    auto dist = parse_fill_response(res->body, candidates, prompt.text, &model);
    if (!model.empty()) {
      std::lock_guard lock(model_mutex_);
      model_ = model;
    }
    return dist;
  }
  throw BackendUnavailableError("backend " + config_.endpoint + " unavailable after " +
                                std::to_string(config_.retries + 1) + " attempts (" +
                                last_failure + ")");
}

std::string HttpBackend::model_id() const {
  {
    std::lock_guard lock(model_mutex_);
    if (!model_.empty()) return model_;
  }
  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  auto res = client.Get(path_prefix_ + "/v1/health");
  if (!res || res->status != 200) return "unknown";
  try {
    auto doc = nlohmann::json::parse(res->body);
    if (doc.contains("model") && doc["model"].is_string()) {
      std::lock_guard lock(model_mutex_);
      model_ = doc["model"].get<std::string>();
      return model_;
    }
  } catch (const nlohmann::json::exception&) {
  }
  return "unknown";
}

std::unique_ptr<MaskBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::kHttp) return std::make_unique<HttpBackend>(config);
  return stub_load_file(config.fixtures, config.mode, config.mask_sentinel);
}

}  // namespace clozener
