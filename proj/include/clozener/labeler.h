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

#ifndef CLOZENER_LABELER_H_
#define CLOZENER_LABELER_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clozener/backend.h"
#include "clozener/candidates.h"
#include "clozener/lexicon.h"
#include "clozener/prompt.h"
#include "clozener/types.h"

namespace clozener {

// How a label's representative-word probabilities collapse into one score.
enum class Aggregation { kMax, kSum };

const char* to_string(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view name);

struct ScoredLabel {
  std::string label;
  double score = 0.0;
  std::string winning_word;
};

// Scores every lexicon label against the distribution and sorts by descending
// score; equal scores keep lexicon declaration order. Words missing from the
// distribution count as 0. The winning word of a label is its most probable
// word (first in list order on ties), under either aggregation.
std::vector<ScoredLabel> score_labels(const MaskDistribution& dist, const LabelLexicon& lexicon,
                                      Aggregation aggregation = Aggregation::kMax);

struct LabelerOptions {
  Aggregation aggregation = Aggregation::kMax;
  double abstain_below = 0.0;  // no prediction when the top score is <= this
};

// Builds the prompt for one span, queries the backend restricted to the
// lexicon's words and returns the arg-max label.
std::optional<Prediction> classify_span(const CandidateSpan& span, const Sentence& sentence,
                                        const Template& tmpl, const MaskBackend& backend,
                                        const LabelLexicon& lexicon,
                                        const LabelerOptions& options = {});

// detect_candidates + classify_span for every span, in span order.
std::vector<Prediction> tag_sentence(const Sentence& sentence, const Template& tmpl,
                                     const MaskBackend& backend, const LabelLexicon& lexicon,
                                     const DetectorConfig& detector = {},
                                     const LabelerOptions& options = {});

// Tags every sentence with up to `jobs` worker threads. Output is aligned
// with dataset.sentences regardless of completion order. The first error
// raised by any worker is rethrown.
std::vector<std::vector<Prediction>> tag_dataset(const Dataset& dataset, const Template& tmpl,
                                                 const MaskBackend& backend,
                                                 const LabelLexicon& lexicon,
                                                 const DetectorConfig& detector = {},
                                                 const LabelerOptions& options = {},
                                                 unsigned jobs = 1);

}  // namespace clozener

#endif  // CLOZENER_LABELER_H_
