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

#include "clozener/ensemble.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "clozener/error.h"

namespace clozener {
namespace {

bool overlaps(const CandidateSpan& a, const CandidateSpan& b) {
  return a.start < b.end && b.start < a.end;
}

template <typename T, typename SpanOf>
void check_disjoint(const std::vector<T>& items, SpanOf span_of, const char* source) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (overlaps(span_of(items[i]), span_of(items[j]))) {
        throw ValidationError(std::string("conflicting ") + source + " spans at tokens " +
                              std::to_string(span_of(items[i]).start) + " and " +
                              std::to_string(span_of(items[j]).start));
      }
    }
  }
}

}  // namespace

SecondaryPredictions read_secondary_jsonl(std::istream& input, const Dataset& dataset) {
  std::map<std::string, const Sentence*> by_id;
  for (const auto& s : dataset.sentences) by_id.emplace(s.id, &s);

  SecondaryPredictions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "secondary line " + std::to_string(line_no);
    try {
      auto record = nlohmann::json::parse(line);
      const std::string id = record.at("id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw NotFoundError(where + ": unknown sentence id '" + id + "'");
      const Sentence& sentence = *it->second;
      auto& spans = out[id];
      for (const auto& s : record.value("spans", nlohmann::json::array())) {
        LabeledSpan ls;
        ls.span.start = s.at("start").get<std::size_t>();
        ls.span.end = s.at("end").get<std::size_t>();
        ls.label = s.at("label").get<std::string>();
        if (ls.span.start >= ls.span.end || ls.span.end > sentence.tokens.size()) {
          throw RangeError(where + ": span (" + std::to_string(ls.span.start) + "," +
                           std::to_string(ls.span.end) + ") out of range for sentence " + id);
        }
        ls.span.surface = span_surface(sentence, ls.span.start, ls.span.end);
        spans.push_back(std::move(ls));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

SecondaryPredictions read_secondary_file(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open secondary predictions file '" + path + "'");
  return read_secondary_jsonl(in, dataset);
}

std::vector<Prediction> combine(const std::vector<Prediction>& base,
                                const std::vector<LabeledSpan>& secondary, double p_h) {
  check_disjoint(base, [](const Prediction& p) -> const CandidateSpan& { return p.span; }, "base");
  check_disjoint(secondary, [](const LabeledSpan& s) -> const CandidateSpan& { return s.span; },
                 "secondary");

  std::vector<Prediction> out;
  if (p_h == kAlwaysBase) {
    out = base;
  } else {
    for (const auto& p : base) {
      if (p.confidence > p_h) out.push_back(p);
    }
    const std::size_t kept = out.size();
    for (const auto& s : secondary) {
      bool covered = std::any_of(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(kept),
                                 [&](const Prediction& p) { return overlaps(p.span, s.span); });
      if (!covered) {
        out.push_back(Prediction{s.span, s.label, 1.0, std::string(), PredictionSource::kSecondary});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) {
    return a.span.start < b.span.start;
  });
  return out;
}

std::vector<std::vector<Prediction>> combine_dataset(
    const Dataset& dataset, const std::vector<std::vector<Prediction>>& base,
    const SecondaryPredictions& secondary, double p_h) {
  if (base.size() > dataset.sentences.size()) {
    throw ArgumentError("more base prediction lists than sentences");
  }
  static const std::vector<Prediction> kNoBase;
  static const std::vector<LabeledSpan> kNoSecondary;
  std::vector<std::vector<Prediction>> out;
  out.reserve(dataset.sentences.size());
  for (std::size_t i = 0; i < dataset.sentences.size(); ++i) {
    auto it = secondary.find(dataset.sentences[i].id);
    out.push_back(combine(i < base.size() ? base[i] : kNoBase,
                          it == secondary.end() ? kNoSecondary : it->second, p_h));
  }
  return out;
}

ThresholdTuning tune_threshold(const Dataset& dev, const std::vector<std::vector<Prediction>>& base,
                               const SecondaryPredictions& secondary, std::vector<double> grid,
                               const LabelFilter& label_filter) {
  if (grid.empty()) throw ArgumentError("threshold grid must not be empty");
  if (dev.sentences.empty()) throw ArgumentError("dev set must not be empty");
  for (double p : grid) {
    if (std::isnan(p)) throw ArgumentError("threshold grid contains NaN");
  }

  grid.push_back(kAlwaysBase);
  grid.push_back(kAlwaysSecondary);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ThresholdTuning tuning;
  bool have_best = false;
  for (double p_h : grid) {
    auto combined = combine_dataset(dev, base, secondary, p_h);
    auto report = span_f1(dev, to_prediction_map(dev, combined), label_filter);
    if (!have_best || report.micro.f1 > tuning.f1) {
      tuning.p_h = p_h;
      tuning.f1 = report.micro.f1;
      have_best = true;
    }
    tuning.table.push_back({p_h, std::move(report)});
  }
  return tuning;
}

std::string format_threshold(double p_h) {
  if (p_h == kAlwaysBase) return "-inf";
  if (p_h == kAlwaysSecondary) return "+inf";
  std::ostringstream os;
  os.precision(17);
  os << p_h;
  // Prefer the short form when it round-trips.
  for (int digits = 1; digits < 17; ++digits) {
    std::ostringstream shortform;
    shortform.precision(digits);
    shortform << p_h;
    if (std::stod(shortform.str()) == p_h) return shortform.str();
  }
  return os.str();
}

nlohmann::ordered_json to_json(const ThresholdTuning& tuning) {
  nlohmann::ordered_json j;
  j["p_h"] = format_threshold(tuning.p_h);
  j["micro_f1"] = tuning.f1;
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const auto& point : tuning.table) {
    nlohmann::ordered_json row;
    row["p_h"] = format_threshold(point.p_h);
    row["micro_f1"] = point.report.micro.f1;
    row["precision"] = point.report.micro.precision;
    row["recall"] = point.report.micro.recall;
    table.push_back(std::move(row));
  }
  j["grid"] = std::move(table);
  return j;
}

}  // namespace clozener
