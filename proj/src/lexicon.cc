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

#include "clozener/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "clozener/backend.h"
#include "clozener/error.h"
#include "json.hpp"

namespace clozener {
namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

LabelLexicon::LabelLexicon(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.label).second) {
      throw ValidationError("duplicate lexicon label '" + e.label + "'");
    }
  }
}

std::vector<std::string> LabelLexicon::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.label);
  return out;
}

const std::vector<std::string>& LabelLexicon::words(std::string_view label) const {
  for (const auto& e : entries_) {
    if (e.label == label) return e.words;
  }
  throw NotFoundError("label '" + std::string(label) + "' not in lexicon");
}

std::vector<std::string> LabelLexicon::all_words() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    for (const auto& w : e.words) {
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  return out;
}

bool operator==(const LabelLexicon& a, const LabelLexicon& b) { return a.entries_ == b.entries_; }

const LabelLexicon& builtin_lexicon() {
  static const LabelLexicon kLexicon({
      {"LOC", {"location", "city", "country", "region", "area", "province", "state", "town"}},
      {"PER", {"person", "man", "woman", "boy", "girl", "human", "someone", "kid"}},
      {"ORG", {"organization", "community", "department", "association", "company", "team"}},
      {"ORDINAL", {"number", "digit", "count", "third", "second"}},
      {"DATE", {"date", "day", "month", "time", "year"}},
  });
  return kLexicon;
}

LexiconLoadResult load_lexicon(std::istream& input) {
  const std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ValidationError("lexicon: no labels");
  }

  // nlohmann collapses duplicate keys, so spot them while parsing.
  std::vector<std::string> duplicate_keys;
  std::set<std::string> top_keys;
  nlohmann::ordered_json::parser_callback_t on_event =
      [&](int depth, nlohmann::ordered_json::parse_event_t event, nlohmann::ordered_json& parsed) {
        if (event == nlohmann::ordered_json::parse_event_t::key && depth == 1) {
          auto key = parsed.get<std::string>();
          if (!top_keys.insert(key).second) duplicate_keys.push_back(key);
        }
        return true;
      };

  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text, on_event);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("lexicon: ") + e.what());
  }
  if (!duplicate_keys.empty()) {
    throw ValidationError("lexicon: duplicate label '" + duplicate_keys.front() + "'");
  }
  if (!doc.is_object()) throw ValidationError("lexicon: top level must be an object");
  if (doc.empty()) throw ValidationError("lexicon: no labels");

  LexiconLoadResult result;
  std::vector<LabelLexicon::Entry> entries;
  for (const auto& [label, words] : doc.items()) {
    if (!words.is_array()) {
      throw ValidationError("lexicon: label '" + label + "' must map to an array of words");
    }
    LabelLexicon::Entry entry{label, {}};
    std::set<std::string> seen;
    for (const auto& w : words) {
      if (!w.is_string()) {
        throw ValidationError("lexicon: non-string entry under label '" + label + "'");
      }
      std::string word = lowercase(w.get<std::string>());
      if (word.empty()) throw ValidationError("lexicon: empty word under label '" + label + "'");
      if (!seen.insert(word).second) {
        result.warnings.push_back("lexicon: dropped duplicate word '" + word + "' in " + label);
        continue;
      }
      if (word.find_first_of(" \t") != std::string::npos) {
        result.warnings.push_back("lexicon: '" + word + "' in " + label +
                                  " is multi-word and will likely score 0");
      }
      entry.words.push_back(std::move(word));
    }
    if (entry.words.empty()) {
      result.warnings.push_back("lexicon: label " + label + " has no words");
    }
    entries.push_back(std::move(entry));
  }
  result.lexicon = LabelLexicon(std::move(entries));
  return result;
}

LexiconLoadResult load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open lexicon file '" + path + "'");
  return load_lexicon(in);
}

void write_lexicon(std::ostream& out, const LabelLexicon& lexicon) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& e : lexicon.entries()) doc[e.label] = e.words;
  out << doc.dump(2) << '\n';
}

DeriveResult derive_from_data(const Dataset& samples, const Template& tmpl,
                              const MaskBackend& backend, std::size_t top_m) {
  if (top_m == 0) throw ArgumentError("top_m must be >= 1");

  std::map<std::string, std::map<std::string, double>> scores;
  std::map<std::string, std::size_t> mentions;
  for (const auto& sentence : samples.sentences) {
    const std::string context = sentence_text(sentence);
    for (const auto& g : sentence.gold) {
      const std::string surface = span_surface(sentence, g.start, g.end);
      const Prompt prompt = backend.mode() == PromptMode::kMasked
                                ? instantiate_masked(tmpl, surface, context, backend.mask_sentinel())
                                : instantiate_causal(tmpl, surface, context);
      const MaskDistribution dist = backend.fill(prompt, std::nullopt);
      auto& acc = scores[g.label];
      for (const auto& [word, p] : dist.probs) acc[lowercase(word)] += p;
      ++mentions[g.label];
    }
  }

  DeriveResult result;
  std::vector<LabelLexicon::Entry> entries;
  for (const auto& label : samples.label_set) {
    LabelLexicon::Entry entry{label, {}};
    if (mentions[label] == 0) {
      result.warnings.push_back("derive: label " + label + " has no mentions in the samples");
      entries.push_back(std::move(entry));
      continue;
    }
    std::vector<std::pair<std::string, double>> ranked(scores[label].begin(), scores[label].end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (std::size_t i = 0; i < ranked.size() && i < top_m; ++i) {
      entry.words.push_back(ranked[i].first);
    }
    entries.push_back(std::move(entry));
  }
  result.lexicon = LabelLexicon(std::move(entries));
  return result;
}

}  // namespace clozener
