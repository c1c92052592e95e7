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

#ifndef CLOZENER_EVALUATOR_H_
#define CLOZENER_EVALUATOR_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clozener/backend.h"
#include "clozener/candidates.h"
#include "clozener/labeler.h"
#include "clozener/lexicon.h"
#include "clozener/prompt.h"
#include "clozener/types.h"
#include "json.hpp"

namespace clozener {

using LabelFilter = std::optional<std::set<std::string>>;

struct PrfCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = tp/(tp+fp), R = tp/(tp+fn); each is 0 on a zero denominator, and
// F1 = 0 when P + R = 0.
PrfCounts make_prf(std::size_t tp, std::size_t fp, std::size_t fn);

struct EvalReport {
  std::map<std::string, PrfCounts> per_label;
  PrfCounts micro;
  std::size_t sentences = 0;
  std::size_t gold_spans = 0;
  std::size_t predicted_spans = 0;
  LabelFilter label_filter;
};

// Exact-boundary, type-sensitive span matching with micro-averaging over the
// evaluated labels. Sentences without an entry in `predictions` count as
// having no predictions; ids unknown to `gold` raise NotFoundError.
EvalReport span_f1(const Dataset& gold, const PredictionMap& predictions,
                   const LabelFilter& label_filter = std::nullopt);

// Keys a dataset-aligned prediction list by sentence id.
PredictionMap to_prediction_map(const Dataset& dataset,
                                const std::vector<std::vector<Prediction>>& predictions);

nlohmann::ordered_json to_json(const EvalReport& report);
void write_report_table(std::ostream& out, const EvalReport& report);

struct TemplateComparison {
  struct Row {
    std::string template_id;
    std::string pattern;
    EvalReport report;
  };
  std::vector<Row> rows;
};

// Resolves ids against `user_templates` first, then the built-in catalog.
std::vector<Template> resolve_templates(const std::vector<std::string>& ids,
                                        const std::vector<Template>& user_templates = {});

// Tags the dataset once per template and evaluates each run. All ids are
// resolved before the first backend query.
TemplateComparison compare_templates(const Dataset& dataset,
                                     const std::vector<std::string>& template_ids,
                                     const std::vector<Template>& user_templates,
                                     const MaskBackend& backend, const LabelLexicon& lexicon,
                                     const DetectorConfig& detector, const LabelerOptions& options,
                                     const LabelFilter& label_filter = std::nullopt,
                                     unsigned jobs = 1);

nlohmann::ordered_json to_json(const TemplateComparison& comparison);

// Labels as rows, templates as columns, F1 in percent.
void write_comparison_table(std::ostream& out, const TemplateComparison& comparison);

}  // namespace clozener

#endif  // CLOZENER_EVALUATOR_H_
