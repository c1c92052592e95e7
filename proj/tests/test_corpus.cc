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

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "clozener/corpus.h"
#include "clozener/error.h"
#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

using namespace clozener;
using clozener::testing::make_prediction;
using clozener::testing::munich_sentence;

namespace {

ParseResult parse(const std::string& text, const ColumnSpec& spec = {}) {
  std::istringstream in(text);
  return parse_conll(in, spec, "t.conll");
}

}  // namespace

TEST_CASE("parse_conll: single token sentence") {
  auto r = parse("Munich NNP B-LOC\n");
  REQUIRE(r.dataset.sentences.size() == 1);
  const auto& s = r.dataset.sentences[0];
  CHECK(s.id == "t.conll:1");
  REQUIRE(s.tokens.size() == 1);
  CHECK(s.tokens[0].surface == "Munich");
  CHECK(s.tokens[0].pos == "NNP");
  REQUIRE(s.gold.size() == 1);
  CHECK(s.gold[0] == GoldSpan{0, 1, "LOC"});
  CHECK(r.dataset.label_set == std::vector<std::string>{"LOC"});
}

TEST_CASE("parse_conll: B/I run merges into one span") {
  auto r = parse("New NNP B-ORG\nYork NNP I-ORG\n");
  REQUIRE(r.dataset.sentences.size() == 1);
  CHECK(r.dataset.sentences[0].gold == std::vector<GoldSpan>{{0, 2, "ORG"}});
  CHECK(r.iob_repairs == 0);
}

TEST_CASE("parse_conll: too few columns names the line") {
  ColumnSpec three{0, 1, 2};
  try {
    parse("Munich\n", three);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("Munich\n"), ParseError);
  CHECK_THROWS_AS(parse("a X O\nb Y\n"), ParseError);
}

TEST_CASE("parse_conll: empty input is an empty dataset") {
  auto r = parse("");
  CHECK(r.dataset.sentences.empty());
  CHECK(r.dataset.label_set.empty());
  CHECK(parse("\n\n\r\n").dataset.sentences.empty());
}

TEST_CASE("parse_conll: orphan I- is repaired and counted") {
  auto r = parse("the DET O\nUnited PROPN I-ORG\nNations PROPN I-ORG\nand CC O\nParis PROPN I-LOC\n"
                 "Texas PROPN I-ORG\n");
  const auto& gold = r.dataset.sentences[0].gold;
  CHECK(gold == std::vector<GoldSpan>{{1, 3, "ORG"}, {4, 5, "LOC"}, {5, 6, "ORG"}});
  CHECK(r.iob_repairs == 3);
  CHECK(r.warnings.size() == 3);
}

TEST_CASE("parse_conll: adjacent B- tags make separate spans") {
  auto r = parse("A X B-PER\nB X B-PER\nC X I-PER\n");
  CHECK(r.dataset.sentences[0].gold == std::vector<GoldSpan>{{0, 1, "PER"}, {1, 3, "PER"}});
}

TEST_CASE("parse_conll: CRLF, tabs, DOCSTART and multiple sentences") {
  auto r = parse("-DOCSTART- -X- O\r\n\r\nEU\tNNP\tB-ORG\r\nrejects VBZ O\r\n\r\n\r\nPeter NNP B-PER\r\n");
  REQUIRE(r.dataset.sentences.size() == 2);
  CHECK(r.dataset.sentences[0].id == "t.conll:1");
  CHECK(r.dataset.sentences[1].id == "t.conll:2");
  CHECK(r.dataset.sentences[0].tokens[1].surface == "rejects");
  CHECK(r.dataset.sentences[0].tokens[1].index == 1);
  CHECK(r.dataset.label_set == std::vector<std::string>{"ORG", "PER"});
}

TEST_CASE("parse_conll: configurable columns") {
  // CoNLL03 layout: token pos chunk tag
  auto r = parse("Peter NNP B-NP B-PER\nBlackburn NNP I-NP I-PER\n");
  CHECK(r.dataset.sentences[0].gold == std::vector<GoldSpan>{{0, 2, "PER"}});
  auto r2 = parse("1 Peter PROPN B-PER\n", ColumnSpec{1, 2, 3});
  CHECK(r2.dataset.sentences[0].tokens[0].surface == "Peter");
  CHECK(r2.dataset.sentences[0].tokens[0].pos == "PROPN");
  auto r3 = parse("Peter B-PER\n", ColumnSpec{0, std::nullopt, std::nullopt});
  CHECK(r3.dataset.sentences[0].tokens[0].pos == "_");
}

TEST_CASE("parse_conll: unknown tag scheme is rejected") {
  CHECK_THROWS_AS(parse("Peter NNP S-PER\n"), ParseError);
  CHECK_THROWS_AS(parse("Peter NNP B-\n"), ParseError);
}

TEST_CASE("sentence_text attaches closing punctuation") {
  CHECK(sentence_text(munich_sentence()) == "I will visit Munich next week.");
  auto s = clozener::testing::make_sentence("x", {{"Hello", "X"}, {",", "X"}, {"world", "X"}, {"!", "X"}});
  CHECK(sentence_text(s) == "Hello, world!");
}

TEST_CASE("write_predictions: conll") {
  Dataset d;
  d.sentences.push_back(munich_sentence());
  std::ostringstream out;
  write_predictions(out, d, {{make_prediction(d.sentences[0], 3, 4, "LOC", 0.43)}},
                    OutputFormat::kConll);
  CHECK(out.str() == "I O\nwill O\nvisit O\nMunich B-LOC\nnext O\nweek O\n. O\n\n");

  std::ostringstream empty;
  write_predictions(empty, d, {{}}, OutputFormat::kConll);
  CHECK(empty.str() == "I O\nwill O\nvisit O\nMunich O\nnext O\nweek O\n. O\n\n");
}

TEST_CASE("write_predictions: out-of-range span names the sentence") {
  Dataset d;
  d.sentences.push_back(clozener::testing::make_sentence("doc:3", {{"a", "X"}, {"b", "X"}, {"c", "X"}}));
  Prediction p;
  p.span = {5, 6, "?"};
  p.label = "LOC";
  std::ostringstream out;
  try {
    write_predictions(out, d, {{p}}, OutputFormat::kJsonLines);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("doc:3") != std::string::npos);
  }
}

TEST_CASE("write_predictions: jsonlines record layout") {
  Dataset d;
  d.sentences.push_back(munich_sentence());
  auto p = make_prediction(d.sentences[0], 3, 4, "LOC", 0.43);
  p.winning_word = "city";
  std::ostringstream out;
  write_predictions(out, d, {{p}}, OutputFormat::kJsonLines);
  CHECK(out.str() ==
        "{\"id\":\"munich.conll:1\",\"tokens\":[\"I\",\"will\",\"visit\",\"Munich\",\"next\","
        "\"week\",\".\"],\"spans\":[{\"start\":3,\"end\":4,\"label\":\"LOC\",\"confidence\":0.43,"
        "\"word\":\"city\",\"source\":\"base\"}]}\n");

  std::istringstream in(out.str());
  auto back = read_predictions_jsonl(in, d);
  REQUIRE(back.count("munich.conll:1"));
  CHECK(back["munich.conll:1"] == std::vector<Prediction>{p});
}

TEST_CASE("read_predictions_jsonl rejects unknown ids") {
  Dataset d;
  d.sentences.push_back(munich_sentence());
  std::istringstream in("{\"id\":\"nope\",\"spans\":[]}\n");
  CHECK_THROWS_AS(read_predictions_jsonl(in, d), NotFoundError);
}

TEST_CASE("property: conll write of gold spans parses back to the same dataset") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    Dataset d = clozener::testing::random_dataset(rng);
    std::vector<std::vector<Prediction>> as_predictions;
    for (const auto& s : d.sentences) {
      std::vector<Prediction> preds;
      for (const auto& g : s.gold) preds.push_back(make_prediction(s, g.start, g.end, g.label));
      as_predictions.push_back(std::move(preds));
    }
    std::ostringstream out;
    write_predictions(out, d, as_predictions, OutputFormat::kConll);
    std::istringstream in(out.str());
    auto back = parse_conll(in, ColumnSpec{0, std::nullopt, std::nullopt}, "rand");
    REQUIRE(back.dataset.sentences.size() == d.sentences.size());
    CHECK(back.iob_repairs == 0);
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const auto& a = d.sentences[i];
      const auto& b = back.dataset.sentences[i];
      REQUIRE(a.tokens.size() == b.tokens.size());
      for (std::size_t t = 0; t < a.tokens.size(); ++t) {
        CHECK(a.tokens[t].surface == b.tokens[t].surface);
      }
      CHECK(a.gold == b.gold);
    }
  }
}

namespace {

Dataset numbered_dataset(std::size_t n) {
  Dataset d;
  d.label_set = {"LOC"};
  for (std::size_t i = 0; i < n; ++i) {
    d.sentences.push_back(clozener::testing::make_sentence("s:" + std::to_string(i + 1),
                                                           {{"x", "PROPN"}}, {{0, 1, "LOC"}}));
  }
  return d;
}

std::vector<std::string> ids(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& s : d.sentences) out.push_back(s.id);
  return out;
}

}  // namespace

TEST_CASE("few_shot_sample: sentences mode") {
  const Dataset d = numbered_dataset(500);
  auto a = few_shot_sample(d, SampleMode::kSentences, 100, 7);
  auto b = few_shot_sample(d, SampleMode::kSentences, 100, 7);
  CHECK(a.dataset.sentences.size() == 100);
  CHECK(ids(a.dataset) == ids(b.dataset));
  CHECK(a.warnings.empty());

  auto other_seed = few_shot_sample(d, SampleMode::kSentences, 100, 8);
  CHECK(ids(other_seed.dataset) != ids(a.dataset));

  std::set<std::string> all;
  for (const auto& id : ids(d)) all.insert(id);
  std::set<std::string> picked;
  for (const auto& id : ids(a.dataset)) {
    CHECK(all.count(id) == 1);
    picked.insert(id);
  }
  CHECK(picked.size() == 100);
}

TEST_CASE("few_shot_sample: k beyond the pool returns everything with a warning") {
  const Dataset d = numbered_dataset(30);
  auto r = few_shot_sample(d, SampleMode::kSentences, 100, 1);
  CHECK(r.dataset.sentences.size() == 30);
  CHECK(ids(r.dataset) == ids(d));
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("few_shot_sample: k = 0 is rejected") {
  CHECK_THROWS_AS(few_shot_sample(numbered_dataset(3), SampleMode::kSentences, 0, 1), ArgumentError);
  CHECK_THROWS_AS(few_shot_sample(numbered_dataset(3), SampleMode::kPerLabelMentions, 0, 1),
                  ArgumentError);
}

TEST_CASE("few_shot_sample: per-label mentions") {
  Dataset d;
  d.label_set = {"LOC", "PER", "ORG", "DATE"};
  for (std::size_t i = 0; i < d.label_set.size(); ++i) {
    d.sentences.push_back(clozener::testing::make_sentence(
        "s:" + std::to_string(i + 1), {{"x", "PROPN"}}, {{0, 1, d.label_set[i]}}));
  }
  auto r = few_shot_sample(d, SampleMode::kPerLabelMentions, 1, 3);
  CHECK(r.dataset.sentences.size() == 4);
  CHECK(r.warnings.empty());

  // Duplicate every label many times: k=2 needs exactly two sentences each.
  Dataset big;
  big.label_set = d.label_set;
  for (int rep = 0; rep < 10; ++rep) {
    for (const auto& s : d.sentences) {
      Sentence c = s;
      c.id = "b:" + std::to_string(big.sentences.size() + 1);
      big.sentences.push_back(c);
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rs = few_shot_sample(big, SampleMode::kPerLabelMentions, 2, seed);
    std::map<std::string, int> counts;
    for (const auto& s : rs.dataset.sentences) {
      for (const auto& g : s.gold) ++counts[g.label];
    }
    for (const auto& label : big.label_set) CHECK(counts[label] == 2);
    CHECK(ids(rs.dataset) == ids(few_shot_sample(big, SampleMode::kPerLabelMentions, 2, seed).dataset));
  }

  auto exhausted = few_shot_sample(d, SampleMode::kPerLabelMentions, 5, 3);
  CHECK(exhausted.dataset.sentences.size() == 4);
  CHECK(exhausted.warnings.size() == 4);
}

TEST_CASE("relabel_group: Group A removes ORG spans") {
  Dataset d;
  d.label_set = {"ORG", "PERSON", "GPE", "NORP", "ORDINAL", "WORK_OF_ART", "QUANTITY", "LAW"};
  d.sentences.push_back(clozener::testing::make_sentence(
      "s:1", {{"Acme", "PROPN"}, {"hired", "VERB"}, {"Bob", "PROPN"}, {"in", "ADP"}, {"Ohio", "PROPN"}},
      {{0, 1, "ORG"}, {2, 3, "PERSON"}, {4, 5, "GPE"}}));
  auto out = relabel_group(d, builtin_entity_group("A"));
  CHECK(out.sentences[0].gold == std::vector<GoldSpan>{{2, 3, "PERSON"}, {4, 5, "GPE"}});
  CHECK(out.label_set == d.label_set);
  CHECK(out.sentences[0].tokens.size() == 5);
}

TEST_CASE("relabel_group: absent target labels leave data unchanged") {
  Dataset d;
  d.label_set = {"PERSON", "ORG"};
  d.sentences.push_back(clozener::testing::make_sentence("s:1", {{"Bob", "PROPN"}}, {{0, 1, "PERSON"}}));
  auto out = relabel_group(d, EntityGroup{"custom", {"ORG"}});
  CHECK(out.sentences[0].gold == d.sentences[0].gold);
}

TEST_CASE("relabel_group: unknown label is an argument error") {
  Dataset d;
  d.label_set = {"PERSON"};
  CHECK_THROWS_AS(relabel_group(d, builtin_entity_group("A")), ArgumentError);
  CHECK_THROWS_AS(relabel_group(d, EntityGroup{"empty", {}}), ArgumentError);
  CHECK_THROWS_AS(builtin_entity_group("D"), NotFoundError);
}

TEST_CASE("builtin entity groups partition eighteen OntoNotes labels") {
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& g : builtin_entity_groups()) {
    CHECK(g.labels.size() == 6);
    total += g.labels.size();
    all.insert(g.labels.begin(), g.labels.end());
  }
  CHECK(total == 18);
  CHECK(all.size() == 18);
}
