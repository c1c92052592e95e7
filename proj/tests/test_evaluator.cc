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
#include <atomic>
#include <random>
#include <sstream>

#include "clozener/error.h"
#include "clozener/evaluator.h"
#include "doctest.h"
#include "test_util.h"

using namespace clozener;
using clozener::testing::make_prediction;
using clozener::testing::make_sentence;
using clozener::testing::munich_sentence;

namespace {

PredictionMap gold_as_predictions(const Dataset& d) {
  PredictionMap out;
  for (const auto& s : d.sentences) {
    auto& list = out[s.id];
    for (const auto& g : s.gold) list.push_back(make_prediction(s, g.start, g.end, g.label));
  }
  return out;
}

void check_against_oracle(const EvalReport& r, const clozener::testing::SpanF1Oracle& o) {
  CHECK(r.micro.tp == o.micro.tp);
  CHECK(r.micro.fp == o.micro.fp);
  CHECK(r.micro.fn == o.micro.fn);
  CHECK(std::abs(r.micro.f1 - clozener::testing::oracle_f1(o.micro)) <= 1e-12);
  for (const auto& [label, c] : o.per_label) {
    REQUIRE(r.per_label.count(label));
    const auto& got = r.per_label.at(label);
    CHECK(got.tp == c.tp);
    CHECK(got.fp == c.fp);
    CHECK(got.fn == c.fn);
    CHECK(std::abs(got.f1 - clozener::testing::oracle_f1(c)) <= 1e-12);
  }
}

// Counts queries; answers from a stub table.
class CountingBackend : public MaskBackend {
 public:
  explicit CountingBackend(StubBackend::Table table) : stub_(std::move(table)) {}
  MaskDistribution fill(const Prompt& prompt, Candidates candidates) const override {
    ++calls;
    return stub_.fill(prompt, candidates);
  }
  PromptMode mode() const override { return stub_.mode(); }
  const std::string& mask_sentinel() const override { return stub_.mask_sentinel(); }
  std::string model_id() const override { return stub_.model_id(); }

  mutable std::atomic<int> calls{0};

 private:
  StubBackend stub_;
};

}  // namespace

TEST_CASE("span_f1: identity") {
  Dataset d;
  d.label_set = {"LOC", "PER"};
  d.sentences.push_back(make_sentence("s:1", {{"Bob", "PROPN"}, {"in", "ADP"}, {"Rome", "PROPN"}},
                                      {{0, 1, "PER"}, {2, 3, "LOC"}}));
  auto r = span_f1(d, gold_as_predictions(d));
  CHECK(r.micro.precision == 1.0);
  CHECK(r.micro.recall == 1.0);
  CHECK(r.micro.f1 == 1.0);
  for (const auto& [label, c] : r.per_label) CHECK(c.f1 == 1.0);
  CHECK(r.gold_spans == 2);
  CHECK(r.predicted_spans == 2);
  CHECK(r.sentences == 1);
}

TEST_CASE("span_f1: partial recall") {
  Dataset d;
  d.label_set = {"LOC"};
  d.sentences.push_back(make_sentence("s:1", {{"Rome", "PROPN"}, {"and", "CCONJ"}, {"Oslo", "PROPN"}},
                                      {{0, 1, "LOC"}, {2, 3, "LOC"}}));
  PredictionMap p{{"s:1", {make_prediction(d.sentences[0], 0, 1, "LOC")}}};
  auto r = span_f1(d, p);
  CHECK(r.micro.precision == 1.0);
  CHECK(r.micro.recall == 0.5);
  CHECK(r.micro.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("span_f1: zero denominators") {
  Dataset d;
  d.label_set = {"LOC"};
  d.sentences.push_back(make_sentence("s:1", {{"Rome", "PROPN"}}, {{0, 1, "LOC"}}));
  auto r = span_f1(d, {});
  CHECK(r.micro.precision == 0.0);
  CHECK(r.micro.recall == 0.0);
  CHECK(r.micro.f1 == 0.0);
  CHECK(r.micro.fn == 1);

  auto p = make_prf(0, 3, 0);
  CHECK(p.precision == 0.0);
  CHECK(p.recall == 0.0);
  CHECK(p.f1 == 0.0);
}

TEST_CASE("span_f1: boundaries and types must match exactly") {
  Dataset d;
  d.label_set = {"LOC"};
  auto s = make_sentence("s:1", {{"New", "PROPN"}, {"York", "PROPN"}}, {{0, 2, "LOC"}});
  d.sentences.push_back(s);
  auto r = span_f1(d, {{"s:1", {make_prediction(s, 1, 2, "LOC"), make_prediction(s, 0, 1, "LOC")}}});
  CHECK(r.micro.tp == 0);
  CHECK(r.micro.fp == 2);
  CHECK(r.micro.fn == 1);
  auto typed = span_f1(d, {{"s:1", {make_prediction(s, 0, 2, "ORG")}}});
  CHECK(typed.micro.tp == 0);
  CHECK(typed.per_label.at("ORG").fp == 1);
  CHECK(typed.per_label.at("LOC").fn == 1);
}

TEST_CASE("span_f1: unknown sentence id") {
  Dataset d;
  d.sentences.push_back(munich_sentence());
  PredictionMap p{{"elsewhere:1", {}}};
  CHECK_THROWS_AS(span_f1(d, p), NotFoundError);
}

TEST_CASE("span_f1: label filter") {
  Dataset d;
  d.label_set = {"LOC", "MISC"};
  auto s = make_sentence("s:1", {{"Rome", "PROPN"}, {"Italian", "ADJ"}}, {{0, 1, "LOC"}, {1, 2, "MISC"}});
  d.sentences.push_back(s);
  PredictionMap p{{"s:1", {make_prediction(s, 0, 1, "LOC"), make_prediction(s, 1, 2, "PER")}}};
  auto r = span_f1(d, p, std::set<std::string>{"LOC"});
  CHECK(r.micro.f1 == 1.0);
  CHECK(r.per_label.size() == 1);
  CHECK(to_json(r)["label_filter"] == nlohmann::json::array({"LOC"}));
}

TEST_CASE("property: span_f1 equals the set-intersection oracle") {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 1000; ++iter) {
    auto d = clozener::testing::random_dataset(rng);
    auto p = clozener::testing::random_predictions(rng, d);
    LabelFilter filter;
    if (iter % 3 == 0) filter = std::set<std::string>{d.label_set.front()};
    check_against_oracle(span_f1(d, p, filter), clozener::testing::oracle_span_f1(d, p, filter));
  }
}

TEST_CASE("property: sentence order and full filter do not change the result") {
  std::mt19937_64 rng(22);
  for (int iter = 0; iter < 300; ++iter) {
    auto d = clozener::testing::random_dataset(rng);
    auto p = clozener::testing::random_predictions(rng, d);
    auto base = span_f1(d, p);
    auto shuffled = d;
    std::shuffle(shuffled.sentences.begin(), shuffled.sentences.end(), rng);
    auto again = span_f1(shuffled, p);
    CHECK(again.micro.tp == base.micro.tp);
    CHECK(again.micro.f1 == base.micro.f1);

    std::set<std::string> all(d.label_set.begin(), d.label_set.end());
    auto filtered = span_f1(d, p, all);
    CHECK(filtered.micro.tp == base.micro.tp);
    CHECK(filtered.micro.fp == base.micro.fp);
    CHECK(filtered.micro.fn == base.micro.fn);
  }
}

TEST_CASE("report serialization") {
  Dataset d;
  d.label_set = {"LOC"};
  d.sentences.push_back(munich_sentence());
  auto r = span_f1(d, gold_as_predictions(d));
  auto j = to_json(r);
  CHECK(j["micro"]["f1"] == 1.0);
  CHECK(j["per_label"]["LOC"]["tp"] == 1);
  std::ostringstream table;
  write_report_table(table, r);
  CHECK(table.str().find("LOC") != std::string::npos);
  CHECK(table.str().find("Micro-Avg") != std::string::npos);
}

TEST_CASE("compare_templates: single template matches a direct run") {
  Dataset d;
  d.label_set = {"LOC"};
  d.sentences.push_back(munich_sentence());
  CountingBackend backend({{"I will visit Munich next week. Munich is a [MASK].", {{"city", 0.43}}}});
  auto cmp = compare_templates(d, {"T1"}, {}, backend, builtin_lexicon(), {}, {});
  REQUIRE(cmp.rows.size() == 1);
  CHECK(cmp.rows[0].template_id == "T1");
  CHECK(cmp.rows[0].pattern == "[TOKEN] is a [MASK].");
  auto direct = span_f1(d, to_prediction_map(d, tag_dataset(d, catalog_template("T1"), backend, builtin_lexicon())));
  CHECK(cmp.rows[0].report.micro.tp == direct.micro.tp);
  CHECK(cmp.rows[0].report.micro.f1 == direct.micro.f1);
  CHECK(cmp.rows[0].report.micro.f1 == 1.0);
}

TEST_CASE("compare_templates: rows differ where fixtures differ") {
  Dataset d;
  d.label_set = {"LOC", "PER"};
  d.sentences.push_back(munich_sentence());
  d.sentences.push_back(make_sentence("s:2", {{"Anna", "PROPN"}, {"sings", "VERB"}}, {{0, 1, "PER"}}));
  // T1 gets both right; T6 calls Munich a person and still gets Anna.
  CountingBackend backend({
      {"I will visit Munich next week. Munich is a [MASK].", {{"city", 0.43}}},
      {"Anna sings Anna is a [MASK].", {{"woman", 0.5}}},
      {"I will visit Munich next week. Munich is an example of a [MASK].", {{"person", 0.3}}},
      {"Anna sings Anna is an example of a [MASK].", {{"girl", 0.4}}},
  });
  auto cmp = compare_templates(d, {"T1", "T6"}, {}, backend, builtin_lexicon(), {}, {});
  REQUIRE(cmp.rows.size() == 2);
  const auto& t1 = cmp.rows[0].report;
  const auto& t6 = cmp.rows[1].report;
  CHECK(t1.per_label.at("LOC").f1 == 1.0);
  CHECK(t1.per_label.at("PER").f1 == 1.0);
  CHECK(t6.per_label.at("LOC").f1 == 0.0);
  CHECK(t6.per_label.at("LOC").fn == 1);
  CHECK(t6.per_label.at("PER").tp == 1);
  CHECK(t6.per_label.at("PER").fp == 1);
  CHECK(t6.per_label.at("PER").f1 == doctest::Approx(2.0 / 3.0));

  std::ostringstream table;
  write_comparison_table(table, cmp);
  CHECK(table.str().find("T6") != std::string::npos);
  auto j = to_json(cmp);
  CHECK(j.size() == 2);
  CHECK(j[1]["template"] == "T6");
}

TEST_CASE("compare_templates: errors surface before any query") {
  Dataset d;
  d.label_set = {"LOC"};
  d.sentences.push_back(munich_sentence());
  CountingBackend backend(StubBackend::Table{});
  CHECK_THROWS_AS(compare_templates(d, {}, {}, backend, builtin_lexicon(), {}, {}), ArgumentError);
  CHECK_THROWS_AS(compare_templates(d, {"T1", "T99"}, {}, backend, builtin_lexicon(), {}, {}), NotFoundError);
  CHECK(backend.calls == 0);

  auto user = parse_template("[TOKEN] lives in a [MASK].", "mine");
  auto resolved = resolve_templates({"mine", "T2"}, {user});
  CHECK(resolved[0].pattern == "[TOKEN] lives in a [MASK].");
  CHECK(resolved[1].id == "T2");
}
