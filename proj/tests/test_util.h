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

#ifndef CLOZENER_TESTS_TEST_UTIL_H_
#define CLOZENER_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "clozener/evaluator.h"
#include "clozener/types.h"

namespace clozener::testing {

inline Sentence make_sentence(std::string id,
                              const std::vector<std::pair<std::string, std::string>>& tokens,
                              std::vector<GoldSpan> gold = {}) {
  Sentence s;
  s.id = std::move(id);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s.tokens.push_back(Token{tokens[i].first, tokens[i].second, i});
  }
  s.gold = std::move(gold);
  return s;
}

inline Sentence munich_sentence() {
  return make_sentence("munich.conll:1", {{"I", "PRON"},
                                          {"will", "AUX"},
                                          {"visit", "VERB"},
                                          {"Munich", "PROPN"},
                                          {"next", "ADJ"},
                                          {"week", "NOUN"},
                                          {".", "PUNCT"}},
                       {{3, 4, "LOC"}});
}

inline Prediction make_prediction(const Sentence& s, std::size_t start, std::size_t end,
                                  std::string label, double confidence = 1.0,
                                  PredictionSource source = PredictionSource::kBase) {
  return Prediction{{start, end, span_surface(s, start, end)}, std::move(label), confidence, "",
                    source};
}

// Random non-overlapping spans over `length` tokens.
inline std::vector<GoldSpan> random_spans(std::mt19937_64& rng, std::size_t length,
                                          const std::vector<std::string>& labels) {
  std::vector<GoldSpan> spans;
  std::size_t i = 0;
  while (i < length) {
    if (rng() % 3 == 0) {
      std::size_t len = 1 + rng() % 3;
      std::size_t end = std::min(length, i + len);
      spans.push_back({i, end, labels[rng() % labels.size()]});
      i = end + (rng() % 2);
    } else {
      ++i;
    }
  }
  return spans;
}

// Up to 10 sentences, up to 4 labels, random non-overlapping gold spans.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t max_sentences = 10,
                              std::size_t max_labels = 4) {
  static const std::vector<std::string> kLabels = {"LOC", "PER", "ORG", "MISC", "DATE", "NORP"};
  Dataset d;
  const std::size_t n_labels = 1 + rng() % max_labels;
  d.label_set.assign(kLabels.begin(), kLabels.begin() + static_cast<std::ptrdiff_t>(n_labels));
  const std::size_t n = 1 + rng() % max_sentences;
  for (std::size_t s = 0; s < n; ++s) {
    Sentence sent;
    sent.id = "rand:" + std::to_string(s + 1);
    const std::size_t len = 1 + rng() % 12;
    for (std::size_t t = 0; t < len; ++t) {
      sent.tokens.push_back(Token{"w" + std::to_string(rng() % 50), (rng() % 2) ? "PROPN" : "NOUN", t});
    }
    sent.gold = random_spans(rng, len, d.label_set);
    d.sentences.push_back(std::move(sent));
  }
  return d;
}

// Predictions that partly copy gold, partly mislabel or shift it, and partly
// invent spans.
inline PredictionMap random_predictions(std::mt19937_64& rng, const Dataset& d) {
  PredictionMap out;
  for (const auto& s : d.sentences) {
    if (rng() % 5 == 0) continue;  // no entry at all
    auto& preds = out[s.id];
    std::vector<GoldSpan> spans;
    switch (rng() % 3) {
      case 0:
        spans = s.gold;
        break;
      case 1:
        spans = random_spans(rng, s.tokens.size(), d.label_set);
        break;
      default:
        spans = s.gold;
        for (auto& g : spans) {
          if (rng() % 2) g.label = d.label_set[rng() % d.label_set.size()];
        }
        break;
    }
    for (const auto& g : spans) preds.push_back(make_prediction(s, g.start, g.end, g.label));
  }
  return out;
}

struct OracleCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Independent span-F1: materialize (sentence, start, end, label) sets and
// intersect them.
struct SpanF1Oracle {
  std::map<std::string, OracleCounts> per_label;
  OracleCounts micro;
};

inline SpanF1Oracle oracle_span_f1(const Dataset& gold, const PredictionMap& preds,
                                   const LabelFilter& filter = std::nullopt) {
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string>;
  std::set<Key> g, p;
  for (const auto& s : gold.sentences) {
    for (const auto& span : s.gold) {
      if (!filter || filter->count(span.label)) g.emplace(s.id, span.start, span.end, span.label);
    }
  }
  for (const auto& [id, list] : preds) {
    for (const auto& pr : list) {
      if (!filter || filter->count(pr.label)) p.emplace(id, pr.span.start, pr.span.end, pr.label);
    }
  }
  SpanF1Oracle o;
  for (const auto& k : g) {
    if (p.count(k)) {
      ++o.per_label[std::get<3>(k)].tp;
    } else {
      ++o.per_label[std::get<3>(k)].fn;
    }
  }
  for (const auto& k : p) {
    if (!g.count(k)) ++o.per_label[std::get<3>(k)].fp;
  }
  for (const auto& [label, c] : o.per_label) {
    o.micro.tp += c.tp;
    o.micro.fp += c.fp;
    o.micro.fn += c.fn;
  }
  return o;
}

inline double oracle_f1(const OracleCounts& c) {
  const double p = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("clozener_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace clozener::testing

#endif  // CLOZENER_TESTS_TEST_UTIL_H_
