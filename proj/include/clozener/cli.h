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

#ifndef CLOZENER_CLI_H_
#define CLOZENER_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clozener/backend.h"
#include "clozener/candidates.h"
#include "clozener/corpus.h"
#include "clozener/evaluator.h"
#include "clozener/labeler.h"
#include "clozener/prompt.h"
#include "json.hpp"

namespace clozener::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,         // data or I/O errors
  kExitUsage = 2,           // bad flags or config
  kExitBackendUnavailable = 3,
  kExitBackendError = 4,    // protocol errors, missing fixtures
};

struct HybridConfig {
  std::string secondary;  // JSON-lines file
  std::optional<double> p_h;
  std::vector<double> grid;
};

struct DeriveConfig {
  std::size_t top_m = 8;
  std::optional<std::size_t> k;  // few-shot sample before deriving
  SampleMode sample_mode = SampleMode::kPerLabelMentions;
};

// Everything a run needs. Loaded from a JSON document, then overridden by
// flags. Relative paths in a config file resolve against the file's
// directory.
struct EngineConfig {
  BackendConfig backend;
  std::string template_spec = "T1";  // catalog/user id, or an inline pattern
  std::vector<Template> user_templates;
  std::string lexicon = "builtin";  // or a JSON lexicon file
  DetectorConfig detector;
  LabelerOptions labeler;
  ColumnSpec columns;
  std::optional<HybridConfig> hybrid;
  LabelFilter eval_labels;
  DeriveConfig derive;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  OutputFormat output_format = OutputFormat::kJsonLines;

  nlohmann::ordered_json to_json() const;

  // Stable fingerprint of to_json().
  std::string hash() const;

  // Template selected by template_spec.
  Template selected_template() const;

  // Throws ConfigError when a referenced file is missing or a value is out of
  // range.
  void validate() const;
};

EngineConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir = "");
EngineConfig load_config(const std::string& path);

// Parses "stub:<fixtures>" or an http(s) URL into `backend`.
void apply_backend_flag(BackendConfig& backend, const std::string& value);

// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace clozener::cli

#endif  // CLOZENER_CLI_H_
