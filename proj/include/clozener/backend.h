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

#ifndef CLOZENER_BACKEND_H_
#define CLOZENER_BACKEND_H_

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clozener/prompt.h"

namespace clozener {

// Probabilities at the mask position for a subset of the vocabulary. Values
// come straight from the model softmax; nothing is renormalized.
struct MaskDistribution {
  std::map<std::string, double> probs;
  std::string prompt_echo;

  // 0 for words not present.
  double prob(const std::string& word) const;

  // Throws ProtocolError unless every value is in [0,1] and the sum is at
  // most 1 + 1e-6.
  void validate() const;
};

inline constexpr double kProbabilitySumSlack = 1e-6;

using Candidates = std::optional<std::span<const std::string>>;

class MaskBackend {
 public:
  virtual ~MaskBackend() = default;

  // With candidates, the result holds exactly those words (0 allowed).
  // Without, it holds the backend's top-k words. Thread-safe.
  virtual MaskDistribution fill(const Prompt& prompt, Candidates candidates) const = 0;

  virtual PromptMode mode() const = 0;
  virtual const std::string& mask_sentinel() const = 0;
  virtual std::string model_id() const = 0;
};

enum class BackendKind { kStub, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kStub;
  std::string endpoint;  // http
  std::string fixtures;  // stub fixture file
  std::string mask_sentinel = "[MASK]";
  PromptMode mode = PromptMode::kMasked;
  std::chrono::milliseconds timeout{10000};
  unsigned retries = 3;
  std::chrono::milliseconds backoff{200};
  std::size_t max_in_flight = 8;
  std::size_t top_k = 50;

  void validate() const;
};

// Answers from a prompt -> {word: prob} table. Used for hermetic tests and
// for replaying recorded model outputs.
class StubBackend : public MaskBackend {
 public:
  using Table = std::map<std::string, std::map<std::string, double>>;

  explicit StubBackend(Table table, PromptMode mode = PromptMode::kMasked,
                       std::string mask_sentinel = "[MASK]");

  MaskDistribution fill(const Prompt& prompt, Candidates candidates) const override;
  PromptMode mode() const override { return mode_; }
  const std::string& mask_sentinel() const override { return mask_sentinel_; }
  std::string model_id() const override { return model_id_; }

  const Table& table() const { return table_; }

 private:
  Table table_;
  PromptMode mode_;
  std::string mask_sentinel_;
  std::string model_id_;
};

std::unique_ptr<StubBackend> stub_load(std::istream& fixtures, PromptMode mode = PromptMode::kMasked,
                                       std::string mask_sentinel = "[MASK]");
std::unique_ptr<StubBackend> stub_load_file(const std::string& path,
                                            PromptMode mode = PromptMode::kMasked,
                                            std::string mask_sentinel = "[MASK]");

// Client for the fill-mask service: POST /v1/fill-mask (masked) or
// /v1/next-word (causal), one prompt per request. Connection failures and
// 5xx answers are retried with exponential backoff; 4xx are not.
class HttpBackend : public MaskBackend {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  MaskDistribution fill(const Prompt& prompt, Candidates candidates) const override;
  PromptMode mode() const override { return config_.mode; }
  const std::string& mask_sentinel() const override { return config_.mask_sentinel; }

  // Model reported by the service; asks /v1/health if no fill has run yet.
  std::string model_id() const override;

 private:
  BackendConfig config_;
  std::string host_;
  std::string path_prefix_;
  mutable std::counting_semaphore<> in_flight_;
  mutable std::mutex model_mutex_;
  mutable std::string model_;
};

std::unique_ptr<MaskBackend> make_backend(const BackendConfig& config);

// Builds a MaskDistribution from a service response body. Exposed for tests.
MaskDistribution parse_fill_response(std::string_view body, Candidates candidates,
                                     std::string prompt_echo, std::string* model = nullptr);

}  // namespace clozener

#endif  // CLOZENER_BACKEND_H_
