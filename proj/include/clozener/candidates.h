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

#ifndef CLOZENER_CANDIDATES_H_
#define CLOZENER_CANDIDATES_H_

#include <set>
#include <string>
#include <vector>

#include "clozener/types.h"

namespace clozener {

struct DetectorConfig {
  std::set<std::string> candidate_pos = {"PROPN"};
  bool include_numeric = false;
  // Tags added to candidate_pos when include_numeric is set.
  std::set<std::string> numeric_pos = {"NUM", "ORD"};
};

// Maximal runs of consecutive candidate-POS tokens, sorted by start.
std::vector<CandidateSpan> detect_candidates(const Sentence& sentence,
                                             const DetectorConfig& config = {});

}  // namespace clozener

#endif  // CLOZENER_CANDIDATES_H_
