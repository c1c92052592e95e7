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

#include "clozener/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "clozener/error.h"
#include "json.hpp"

namespace clozener {
namespace {

std::vector<std::string> split_columns(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) cols.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

bool is_closing_punct(std::string_view s) {
  static const std::set<std::string_view> kClosing = {".", ",", ";", ":", "!", "?", ")",
                                                       "]", "}", "%", "...", "'s", "n't"};
  return kClosing.count(s) > 0;
}

class SentenceBuilder {
 public:
  SentenceBuilder(std::string_view source, ParseResult& result) : source_(source), result_(result) {}

  void add(std::string surface, std::string pos, std::string_view tag, std::size_t line_no) {
    const std::size_t index = current_.tokens.size();
    current_.tokens.push_back(Token{std::move(surface), std::move(pos), index});

    if (tag == "O") {
      close(index);
      return;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw ParseError("line " + std::to_string(line_no) + ": unrecognized entity tag '" +
                       std::string(tag) + "'");
    }
    std::string label(tag.substr(2));
    if (tag[0] == 'I' && open_label_ && *open_label_ == label) return;
    if (tag[0] == 'I') {
      ++result_.iob_repairs;
      result_.warnings.push_back("line " + std::to_string(line_no) + ": orphan " +
                                 std::string(tag) + " treated as B-" + label);
    }
    close(index);
    open_start_ = index;
    open_label_ = label;
    note_label(label);
  }

  void finish() {
    if (current_.tokens.empty()) return;
    close(current_.tokens.size());
    ++ordinal_;
    current_.id = source_ + ":" + std::to_string(ordinal_);
    result_.dataset.sentences.push_back(std::move(current_));
    current_ = Sentence{};
  }

 private:
  void close(std::size_t end) {
    if (!open_label_) return;
    current_.gold.push_back(GoldSpan{open_start_, end, *open_label_});
    open_label_.reset();
  }

  void note_label(const std::string& label) {
    auto& labels = result_.dataset.label_set;
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
  }

  std::string source_;
  ParseResult& result_;
  Sentence current_;
  std::size_t ordinal_ = 0;
  std::size_t open_start_ = 0;
  std::optional<std::string> open_label_;
};

void check_spans(const Sentence& sentence, const std::vector<Prediction>& predictions) {
  std::size_t prev_end = 0;
  std::vector<const Prediction*> sorted;
  for (const auto& p : predictions) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const Prediction* a, const Prediction* b) { return a->span.start < b->span.start; });
  for (const Prediction* p : sorted) {
    if (p->span.start >= p->span.end || p->span.end > sentence.tokens.size()) {
      throw RangeError("sentence " + sentence.id + ": prediction span (" +
                       std::to_string(p->span.start) + "," + std::to_string(p->span.end) +
                       ") out of range for " + std::to_string(sentence.tokens.size()) +
                       " tokens");
    }
    if (p->span.start < prev_end) {
      throw RangeError("sentence " + sentence.id + ": overlapping prediction spans at token " +
                       std::to_string(p->span.start));
    }
    prev_end = p->span.end;
  }
}

}  // namespace

const char* to_string(PredictionSource source) {
  return source == PredictionSource::kBase ? "base" : "secondary";
}

std::string span_surface(const Sentence& sentence, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end && i < sentence.tokens.size(); ++i) {
    if (i > start) out += ' ';
    out += sentence.tokens[i].surface;
  }
  return out;
}

std::string sentence_text(const Sentence& sentence) {
  std::string out;
  for (const auto& token : sentence.tokens) {
    if (!out.empty() && !is_closing_punct(token.surface)) out += ' ';
    out += token.surface;
  }
  return out;
}

ParseResult parse_conll(std::istream& input, const ColumnSpec& columns,
                        std::string_view source_name) {
  ParseResult result;
  SentenceBuilder builder(source_name, result);

  std::size_t needed = std::max(columns.token_col, columns.pos_col.value_or(0)) + 1;
  if (columns.tag_col) {
    needed = std::max(needed, *columns.tag_col + 1);
  } else {
    needed += 1;  // the tag must be a column of its own
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto cols = split_columns(line);
    if (cols.empty()) {
      builder.finish();
      continue;
    }
    if (cols[0] == "-DOCSTART-") {
      builder.finish();
      continue;
    }
    if (cols.size() < needed) {
      throw ParseError("line " + std::to_string(line_no) + ": expected at least " +
                       std::to_string(needed) + " columns, found " +
                       std::to_string(cols.size()));
    }
    const std::string& tag = columns.tag_col ? cols[*columns.tag_col] : cols.back();
    std::string pos = columns.pos_col ? cols[*columns.pos_col] : std::string("_");
    builder.add(cols[columns.token_col], std::move(pos), tag, line_no);
  }
  builder.finish();
  return result;
}

ParseResult parse_conll_file(const std::string& path, const ColumnSpec& columns) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open corpus file '" + path + "'");
  return parse_conll(in, columns, std::filesystem::path(path).filename().string());
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "conll") return OutputFormat::kConll;
  if (name == "jsonlines" || name == "jsonl") return OutputFormat::kJsonLines;
  throw ArgumentError("unknown output format '" + std::string(name) + "'");
}

void write_predictions(std::ostream& out, const Dataset& dataset,
                       const std::vector<std::vector<Prediction>>& predictions,
                       OutputFormat format) {
  if (predictions.size() > dataset.sentences.size()) {
    throw ArgumentError("more prediction lists than sentences");
  }
  static const std::vector<Prediction> kNone;
  for (std::size_t s = 0; s < dataset.sentences.size(); ++s) {
    const Sentence& sentence = dataset.sentences[s];
    const auto& preds = s < predictions.size() ? predictions[s] : kNone;
    check_spans(sentence, preds);

    if (format == OutputFormat::kConll) {
      std::vector<std::string> tags(sentence.tokens.size(), "O");
      for (const auto& p : preds) {
        tags[p.span.start] = "B-" + p.label;
        for (std::size_t i = p.span.start + 1; i < p.span.end; ++i) tags[i] = "I-" + p.label;
      }
      for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
        out << sentence.tokens[i].surface << ' ' << tags[i] << '\n';
      }
      out << '\n';
      continue;
    }

    nlohmann::ordered_json record;
    record["id"] = sentence.id;
    auto tokens = nlohmann::ordered_json::array();
    for (const auto& t : sentence.tokens) tokens.push_back(t.surface);
    record["tokens"] = std::move(tokens);
    auto spans = nlohmann::ordered_json::array();
    for (const auto& p : preds) {
      nlohmann::ordered_json span;
      span["start"] = p.span.start;
      span["end"] = p.span.end;
      span["label"] = p.label;
      span["confidence"] = p.confidence;
      span["word"] = p.winning_word;
      span["source"] = to_string(p.source);
      spans.push_back(std::move(span));
    }
    record["spans"] = std::move(spans);
    out << record.dump() << '\n';
  }
}

PredictionMap read_predictions_jsonl(std::istream& input, const Dataset& dataset) {
  std::map<std::string, const Sentence*> by_id;
  for (const auto& s : dataset.sentences) by_id.emplace(s.id, &s);

  PredictionMap result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "predictions line " + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string()) {
      throw ParseError(where + ": record needs a string 'id'");
    }
    const std::string id = record["id"].get<std::string>();
    auto it = by_id.find(id);
    if (it == by_id.end()) throw NotFoundError(where + ": unknown sentence id '" + id + "'");
    const Sentence& sentence = *it->second;

    auto& preds = result[id];
    if (!record.contains("spans")) continue;
    if (!record["spans"].is_array()) throw ParseError(where + ": 'spans' must be an array");
    try {
      for (const auto& span : record["spans"]) {
        Prediction p;
        p.span.start = span.at("start").get<std::size_t>();
        p.span.end = span.at("end").get<std::size_t>();
        p.label = span.at("label").get<std::string>();
        p.confidence = span.value("confidence", 1.0);
        p.winning_word = span.value("word", std::string());
        p.source = span.value("source", std::string("base")) == "secondary"
                       ? PredictionSource::kSecondary
                       : PredictionSource::kBase;
        if (p.span.start >= p.span.end || p.span.end > sentence.tokens.size()) {
          throw RangeError("sentence " + id + ": span (" + std::to_string(p.span.start) + "," +
                           std::to_string(p.span.end) + ") out of range");
        }
        p.span.surface = span_surface(sentence, p.span.start, p.span.end);
        preds.push_back(std::move(p));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return result;
}

SampleMode parse_sample_mode(std::string_view name) {
  if (name == "per_label_mentions" || name == "per-label-mentions") {
    return SampleMode::kPerLabelMentions;
  }
  if (name == "sentences") return SampleMode::kSentences;
  throw ArgumentError("unknown sample mode '" + std::string(name) + "'");
}

SampleResult few_shot_sample(const Dataset& dataset, SampleMode mode, std::size_t k,
                             std::uint64_t seed) {
  if (k == 0) throw ArgumentError("few-shot sample size k must be >= 1");

  SampleResult result;
  result.dataset.label_set = dataset.label_set;

  const std::size_t n = dataset.sentences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> chosen;
  if (mode == SampleMode::kSentences) {
    if (k > n) {
      result.warnings.push_back("requested " + std::to_string(k) + " sentences but only " +
                                std::to_string(n) + " available; using all");
    }
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(k, n)));
  } else {
    std::map<std::string, std::size_t> counts;
    for (const auto& label : dataset.label_set) counts[label] = 0;
    auto unsatisfied = [&] {
      return std::count_if(counts.begin(), counts.end(),
                           [&](const auto& kv) { return kv.second < k; });
    };
    for (std::size_t idx : order) {
      if (unsatisfied() == 0) break;
      const Sentence& s = dataset.sentences[idx];
      bool useful = std::any_of(s.gold.begin(), s.gold.end(), [&](const GoldSpan& g) {
        auto it = counts.find(g.label);
        return it != counts.end() && it->second < k;
      });
      if (!useful) continue;
      chosen.push_back(idx);
      for (const auto& g : s.gold) ++counts[g.label];
    }
    for (const auto& label : dataset.label_set) {
      if (counts[label] < k) {
        result.warnings.push_back("label " + label + " has only " +
                                  std::to_string(counts[label]) + " of " + std::to_string(k) +
                                  " requested mentions; pool exhausted");
      }
    }
  }

  std::sort(chosen.begin(), chosen.end());
  for (std::size_t idx : chosen) result.dataset.sentences.push_back(dataset.sentences[idx]);
  return result;
}

const std::vector<EntityGroup>& builtin_entity_groups() {
  static const std::vector<EntityGroup> kGroups = {
      {"A", {"ORG", "NORP", "ORDINAL", "WORK_OF_ART", "QUANTITY", "LAW"}},
      {"B", {"GPE", "CARDINAL", "PERCENT", "TIME", "EVENT", "LANGUAGE"}},
      {"C", {"PERSON", "DATE", "MONEY", "LOC", "FAC", "PRODUCT"}},
  };
  return kGroups;
}

const EntityGroup& builtin_entity_group(std::string_view name) {
  for (const auto& g : builtin_entity_groups()) {
    if (g.name == name) return g;
  }
  throw NotFoundError("unknown entity group '" + std::string(name) + "'");
}

Dataset relabel_group(const Dataset& dataset, const EntityGroup& target) {
  if (target.labels.empty()) throw ArgumentError("entity group " + target.name + " is empty");
  for (const auto& label : target.labels) {
    if (std::find(dataset.label_set.begin(), dataset.label_set.end(), label) ==
        dataset.label_set.end()) {
      throw ArgumentError("group " + target.name + " label '" + label +
                          "' is not in the dataset label set");
    }
  }
  Dataset out = dataset;
  for (auto& sentence : out.sentences) {
    std::erase_if(sentence.gold,
                  [&](const GoldSpan& g) { return target.labels.count(g.label) > 0; });
  }
  return out;
}

}  // namespace clozener
