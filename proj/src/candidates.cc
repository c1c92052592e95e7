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

#include "clozener/candidates.h"

#include "clozener/error.h"

namespace clozener {

std::vector<CandidateSpan> detect_candidates(const Sentence& sentence,
                                             const DetectorConfig& config) {
  if (config.candidate_pos.empty()) throw ArgumentError("candidate_pos must not be empty");

  auto is_candidate = [&](const Token& t) {
    if (config.candidate_pos.count(t.pos)) return true;
    return config.include_numeric && config.numeric_pos.count(t.pos) > 0;
  };

  std::vector<CandidateSpan> spans;
  const auto& tokens = sentence.tokens;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_candidate(tokens[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tokens.size() && is_candidate(tokens[j])) ++j;
    spans.push_back(CandidateSpan{i, j, span_surface(sentence, i, j)});
    i = j;
  }
  return spans;
}

}  // namespace clozener
