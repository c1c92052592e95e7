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

#ifndef CLOZENER_CORPUS_H_
#define CLOZENER_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clozener/types.h"

namespace clozener {

// Column layout of a CoNLL-style file. A missing tag column means "last
// column on the line"; a missing pos column leaves Token::pos as "_".
struct ColumnSpec {
  std::size_t token_col = 0;
  std::optional<std::size_t> pos_col = 1;
  std::optional<std::size_t> tag_col;
};

struct ParseResult {
  Dataset dataset;
  std::size_t iob_repairs = 0;
  std::vector<std::string> warnings;
};

// Reads whitespace-separated columns, one token per line, blank lines between
// sentences. BIO/IOB tags become GoldSpans; an orphan I-X opens a new span.
// Sentence ids are "<source_name>:<1-based ordinal>".
ParseResult parse_conll(std::istream& input, const ColumnSpec& columns = {},
                        std::string_view source_name = "stdin");
ParseResult parse_conll_file(const std::string& path, const ColumnSpec& columns = {});

enum class OutputFormat { kConll, kJsonLines };

OutputFormat parse_output_format(std::string_view name);

// `predictions` is aligned with dataset.sentences (missing tail = no
// predictions). Throws RangeError naming the sentence on invalid spans.
void write_predictions(std::ostream& out, const Dataset& dataset,
                       const std::vector<std::vector<Prediction>>& predictions,
                       OutputFormat format);

// Reads the JSON-lines form produced by write_predictions. Records are matched
// to `dataset` by id; surfaces are recomputed from the dataset tokens.
PredictionMap read_predictions_jsonl(std::istream& input, const Dataset& dataset);

enum class SampleMode { kPerLabelMentions, kSentences };

SampleMode parse_sample_mode(std::string_view name);

struct SampleResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

SampleResult few_shot_sample(const Dataset& dataset, SampleMode mode, std::size_t k,
                             std::uint64_t seed);

struct EntityGroup {
  std::string name;
  std::set<std::string> labels;
};

// The OntoNotes three-way label partition used for group-split adaptation.
const std::vector<EntityGroup>& builtin_entity_groups();
const EntityGroup& builtin_entity_group(std::string_view name);

// Drops every gold span whose label is in the group (same as O-tagging it).
Dataset relabel_group(const Dataset& dataset, const EntityGroup& target);

}  // namespace clozener

#endif  // CLOZENER_CORPUS_H_
