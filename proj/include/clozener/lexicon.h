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

#ifndef CLOZENER_LEXICON_H_
#define CLOZENER_LEXICON_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "clozener/corpus.h"
#include "clozener/prompt.h"

namespace clozener {

class MaskBackend;

// Representative words per entity label. Label order is significant: it
// breaks score ties in the labeler.
class LabelLexicon {
 public:
  struct Entry {
    std::string label;
    std::vector<std::string> words;  // lowercase, unique
  };

  LabelLexicon() = default;
  explicit LabelLexicon(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::string> labels() const;
  const std::vector<std::string>& words(std::string_view label) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Every word across labels, first-occurrence order, no duplicates.
  std::vector<std::string> all_words() const;

  friend bool operator==(const LabelLexicon&, const LabelLexicon&);

 private:
  std::vector<Entry> entries_;
};

inline bool operator==(const LabelLexicon::Entry& a, const LabelLexicon::Entry& b) {
  return a.label == b.label && a.words == b.words;
}

// LOC, PER, ORG, ORDINAL, DATE hand-picked lists.
const LabelLexicon& builtin_lexicon();

struct LexiconLoadResult {
  LabelLexicon lexicon;
  std::vector<std::string> warnings;
};

// JSON object {"LABEL": ["word", ...], ...}. Words are lowercased and
// de-duplicated; file label order is kept.
LexiconLoadResult load_lexicon(std::istream& input);
LexiconLoadResult load_lexicon_file(const std::string& path);

void write_lexicon(std::ostream& out, const LabelLexicon& lexicon);

struct DeriveResult {
  LabelLexicon lexicon;
  std::vector<std::string> warnings;
};

// Builds W_l from labeled samples: every gold mention is turned into a prompt
// with `tmpl`, the backend's unrestricted top-k distribution is summed per
// label, and the top_m words by accumulated probability are kept.
DeriveResult derive_from_data(const Dataset& samples, const Template& tmpl,
                              const MaskBackend& backend, std::size_t top_m = 8);

}  // namespace clozener

#endif  // CLOZENER_LEXICON_H_
