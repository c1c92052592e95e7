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

#ifndef CLOZENER_ENSEMBLE_H_
#define CLOZENER_ENSEMBLE_H_

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "clozener/evaluator.h"
#include "clozener/types.h"

namespace clozener {

// A span labeled by the supervised (secondary) classifier.
struct LabeledSpan {
  CandidateSpan span;
  std::string label;
};

using SecondaryPredictions = std::map<std::string, std::vector<LabeledSpan>>;

// JSON-lines records {id, spans:[{start,end,label}]}; ids must exist in
// `dataset` and spans must fit their sentence.
SecondaryPredictions read_secondary_jsonl(std::istream& input, const Dataset& dataset);
SecondaryPredictions read_secondary_file(const std::string& path, const Dataset& dataset);

inline constexpr double kAlwaysBase = -std::numeric_limits<double>::infinity();
inline constexpr double kAlwaysSecondary = std::numeric_limits<double>::infinity();

// Confidence-threshold arbitration for one sentence. Base predictions with
// confidence strictly above p_h are kept; every secondary span that does not
// overlap a kept base span is relayed (source=secondary, confidence 1.0).
// p_h = kAlwaysBase returns exactly the base list. Output is sorted by start.
// Overlapping spans inside either input raise ValidationError.
std::vector<Prediction> combine(const std::vector<Prediction>& base,
                                const std::vector<LabeledSpan>& secondary, double p_h);

// combine() over a whole dataset; base is aligned with dataset.sentences.
std::vector<std::vector<Prediction>> combine_dataset(
    const Dataset& dataset, const std::vector<std::vector<Prediction>>& base,
    const SecondaryPredictions& secondary, double p_h);

struct ThresholdTuning {
  struct GridPoint {
    double p_h = 0.0;
    EvalReport report;
  };
  double p_h = 0.0;
  double f1 = 0.0;
  std::vector<GridPoint> table;  // ascending p_h, includes both sentinels
};

// Grid search for the p_h maximizing dev micro-F1. The grid is extended with
// kAlwaysBase and kAlwaysSecondary; ties go to the smallest threshold.
ThresholdTuning tune_threshold(const Dataset& dev, const std::vector<std::vector<Prediction>>& base,
                               const SecondaryPredictions& secondary, std::vector<double> grid,
                               const LabelFilter& label_filter = std::nullopt);

nlohmann::ordered_json to_json(const ThresholdTuning& tuning);

// "-inf" / "+inf" for sentinels, shortest round-trip decimal otherwise.
std::string format_threshold(double p_h);

}  // namespace clozener

#endif  // CLOZENER_ENSEMBLE_H_
