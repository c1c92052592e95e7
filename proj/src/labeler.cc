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

#include "clozener/labeler.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "clozener/error.h"

namespace clozener {

const char* to_string(Aggregation aggregation) {
  return aggregation == Aggregation::kMax ? "max" : "sum";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "max") return Aggregation::kMax;
  if (name == "sum") return Aggregation::kSum;
  throw ConfigError("unknown aggregation '" + std::string(name) + "'");
}

std::vector<ScoredLabel> score_labels(const MaskDistribution& dist, const LabelLexicon& lexicon,
                                      Aggregation aggregation) {
  if (lexicon.empty()) throw ArgumentError("cannot score against an empty lexicon");

  std::vector<ScoredLabel> scored;
  scored.reserve(lexicon.size());
  for (const auto& entry : lexicon.entries()) {
    ScoredLabel s{entry.label, 0.0, entry.words.empty() ? std::string() : entry.words.front()};
    double best = -1.0;
    for (const auto& word : entry.words) {
      const double p = dist.prob(word);
      if (p > best) {
        best = p;
        s.winning_word = word;
      }
      s.score = aggregation == Aggregation::kMax ? std::max(s.score, p) : s.score + p;
    }
    scored.push_back(std::move(s));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return scored;
}

std::optional<Prediction> classify_span(const CandidateSpan& span, const Sentence& sentence,
                                        const Template& tmpl, const MaskBackend& backend,
                                        const LabelLexicon& lexicon,
                                        const LabelerOptions& options) {
  const std::string context = sentence_text(sentence);
  const Prompt prompt = backend.mode() == PromptMode::kMasked
                            ? instantiate_masked(tmpl, span.surface, context, backend.mask_sentinel())
                            : instantiate_causal(tmpl, span.surface, context);
  const std::vector<std::string> words = lexicon.all_words();
  const MaskDistribution dist = backend.fill(prompt, std::span<const std::string>(words));
  const auto scored = score_labels(dist, lexicon, options.aggregation);

  const ScoredLabel& top = scored.front();
  if (top.score <= options.abstain_below) return std::nullopt;
  return Prediction{span, top.label, top.score, top.winning_word, PredictionSource::kBase};
}

std::vector<Prediction> tag_sentence(const Sentence& sentence, const Template& tmpl,
                                     const MaskBackend& backend, const LabelLexicon& lexicon,
                                     const DetectorConfig& detector,
                                     const LabelerOptions& options) {
  std::vector<Prediction> out;
  for (const auto& span : detect_candidates(sentence, detector)) {
    if (auto p = classify_span(span, sentence, tmpl, backend, lexicon, options)) {
      out.push_back(std::move(*p));
    }
  }
  return out;
}

std::vector<std::vector<Prediction>> tag_dataset(const Dataset& dataset, const Template& tmpl,
                                                 const MaskBackend& backend,
                                                 const LabelLexicon& lexicon,
                                                 const DetectorConfig& detector,
                                                 const LabelerOptions& options, unsigned jobs) {
  const std::size_t n = dataset.sentences.size();
  std::vector<std::vector<Prediction>> results(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = tag_sentence(dataset.sentences[i], tmpl, backend, lexicon, detector, options);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace clozener
