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

#ifndef CLOZENER_TYPES_H_
#define CLOZENER_TYPES_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace clozener {

struct Token {
  std::string surface;
  std::string pos;
  std::size_t index = 0;
};

// Half-open token range [start, end) with an entity label.
struct GoldSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  friend bool operator==(const GoldSpan&, const GoldSpan&) = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<GoldSpan> gold;  // sorted by start, non-overlapping
};

struct Dataset {
  std::vector<Sentence> sentences;
  std::vector<std::string> label_set;  // declared/first-seen order
};

struct CandidateSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const CandidateSpan&, const CandidateSpan&) = default;
};

enum class PredictionSource { kBase, kSecondary };

const char* to_string(PredictionSource source);

struct Prediction {
  CandidateSpan span;
  std::string label;
  double confidence = 0.0;
  std::string winning_word;
  PredictionSource source = PredictionSource::kBase;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Predictions keyed by sentence id.
using PredictionMap = std::map<std::string, std::vector<Prediction>>;

// Space-joined surface of tokens [start, end).
std::string span_surface(const Sentence& sentence, std::size_t start, std::size_t end);

// Sentence rendered as prompt context. Tokens are joined by single spaces
// except that closing punctuation attaches to the preceding token.
std::string sentence_text(const Sentence& sentence);

}  // namespace clozener

#endif  // CLOZENER_TYPES_H_
