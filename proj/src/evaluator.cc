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

#include "clozener/evaluator.h"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <tuple>

#include "clozener/error.h"

namespace clozener {
namespace {

using SpanKey = std::tuple<std::size_t, std::size_t, std::string>;

bool keep(const LabelFilter& filter, const std::string& label) {
  return !filter || filter->count(label) > 0;
}

nlohmann::ordered_json prf_json(const PrfCounts& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = c.precision;
  j["recall"] = c.recall;
  j["f1"] = c.f1;
  return j;
}

std::string percent(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << v * 100.0;
  return os.str();
}

}  // namespace

PrfCounts make_prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfCounts c{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) c.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) c.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (c.precision + c.recall > 0.0) {
    c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
  }
  return c;
}

EvalReport span_f1(const Dataset& gold, const PredictionMap& predictions,
                   const LabelFilter& label_filter) {
  std::map<std::string, const Sentence*> by_id;
  for (const auto& s : gold.sentences) by_id.emplace(s.id, &s);
  for (const auto& [id, preds] : predictions) {
    if (!by_id.count(id)) throw NotFoundError("predictions reference unknown sentence id '" + id + "'");
  }

  struct Tally {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& label : gold.label_set) {
    if (keep(label_filter, label)) tallies[label];
  }

  EvalReport report;
  report.label_filter = label_filter;
  report.sentences = gold.sentences.size();

  static const std::vector<Prediction> kNone;
  for (const auto& sentence : gold.sentences) {
    auto it = predictions.find(sentence.id);
    const auto& preds = it == predictions.end() ? kNone : it->second;

    std::set<SpanKey> gold_keys;
    for (const auto& g : sentence.gold) {
      if (!keep(label_filter, g.label)) continue;
      gold_keys.emplace(g.start, g.end, g.label);
      ++report.gold_spans;
    }
    std::set<SpanKey> matched;
    for (const auto& p : preds) {
      if (!keep(label_filter, p.label)) continue;
      ++report.predicted_spans;
      SpanKey key{p.span.start, p.span.end, p.label};
      if (gold_keys.count(key) && matched.insert(key).second) {
        ++tallies[p.label].tp;
      } else {
        ++tallies[p.label].fp;
      }
    }
    for (const auto& key : gold_keys) {
      if (!matched.count(key)) ++tallies[std::get<2>(key)].fn;
    }
  }

  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [label, t] : tallies) {
    report.per_label[label] = make_prf(t.tp, t.fp, t.fn);
    tp += t.tp;
    fp += t.fp;
    fn += t.fn;
  }
  report.micro = make_prf(tp, fp, fn);
  return report;
}

PredictionMap to_prediction_map(const Dataset& dataset,
                                const std::vector<std::vector<Prediction>>& predictions) {
  if (predictions.size() > dataset.sentences.size()) {
    throw ArgumentError("more prediction lists than sentences");
  }
  PredictionMap out;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out[dataset.sentences[i].id] = predictions[i];
  }
  return out;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (const auto& [label, c] : report.per_label) labels[label] = prf_json(c);
  j["per_label"] = std::move(labels);
  j["micro"] = prf_json(report.micro);
  j["counts"] = {{"sentences", report.sentences},
                 {"gold_spans", report.gold_spans},
                 {"predicted_spans", report.predicted_spans}};
  if (report.label_filter) {
    j["label_filter"] = std::vector<std::string>(report.label_filter->begin(),
                                                 report.label_filter->end());
    j["filter_policy"] = "gold and predicted spans outside label_filter are excluded";
  } else {
    j["label_filter"] = nullptr;
  }
  return j;
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  std::size_t width = 9;
  for (const auto& [label, c] : report.per_label) width = std::max(width, label.size());
  auto row = [&](const std::string& name, const PrfCounts& c) {
    out << std::left << std::setw(static_cast<int>(width)) << name << std::right
        << std::setw(7) << c.tp << std::setw(7) << c.fp << std::setw(7) << c.fn
        << std::setw(8) << percent(c.precision) << std::setw(8) << percent(c.recall)
        << std::setw(8) << percent(c.f1) << '\n';
  };
  out << std::left << std::setw(static_cast<int>(width)) << "label" << std::right << std::setw(7)
      << "tp" << std::setw(7) << "fp" << std::setw(7) << "fn" << std::setw(8) << "P%"
      << std::setw(8) << "R%" << std::setw(8) << "F1%" << '\n';
  for (const auto& [label, c] : report.per_label) row(label, c);
  row("Micro-Avg", report.micro);
}

std::vector<Template> resolve_templates(const std::vector<std::string>& ids,
                                        const std::vector<Template>& user_templates) {
  std::vector<Template> out;
  for (const auto& id : ids) {
    auto it = std::find_if(user_templates.begin(), user_templates.end(),
                           [&](const Template& t) { return t.id == id; });
    out.push_back(it != user_templates.end() ? *it : catalog_template(id));
  }
  return out;
}

TemplateComparison compare_templates(const Dataset& dataset,
                                     const std::vector<std::string>& template_ids,
                                     const std::vector<Template>& user_templates,
                                     const MaskBackend& backend, const LabelLexicon& lexicon,
                                     const DetectorConfig& detector, const LabelerOptions& options,
                                     const LabelFilter& label_filter, unsigned jobs) {
  if (template_ids.empty()) throw ArgumentError("template list must not be empty");
  const auto templates = resolve_templates(template_ids, user_templates);

  TemplateComparison comparison;
  for (const auto& tmpl : templates) {
    auto predictions = tag_dataset(dataset, tmpl, backend, lexicon, detector, options, jobs);
    comparison.rows.push_back(
        {tmpl.id, tmpl.pattern,
         span_f1(dataset, to_prediction_map(dataset, predictions), label_filter)});
  }
  return comparison;
}

nlohmann::ordered_json to_json(const TemplateComparison& comparison) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : comparison.rows) {
    nlohmann::ordered_json r;
    r["template"] = row.template_id;
    r["pattern"] = row.pattern;
    nlohmann::ordered_json f1 = nlohmann::ordered_json::object();
    for (const auto& [label, c] : row.report.per_label) f1[label] = c.f1;
    r["f1"] = std::move(f1);
    r["micro_f1"] = row.report.micro.f1;
    r["report"] = to_json(row.report);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_comparison_table(std::ostream& out, const TemplateComparison& comparison) {
  std::vector<std::string> labels;
  for (const auto& row : comparison.rows) {
    for (const auto& [label, c] : row.report.per_label) {
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    }
  }
  std::size_t width = 10;
  for (const auto& l : labels) width = std::max(width, l.size() + 1);
  std::size_t col = 6;
  for (const auto& row : comparison.rows) col = std::max(col, row.template_id.size() + 2);

  out << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
  for (const auto& row : comparison.rows) out << std::setw(static_cast<int>(col)) << row.template_id;
  out << '\n';
  for (const auto& label : labels) {
    out << std::left << std::setw(static_cast<int>(width)) << label << std::right;
    for (const auto& row : comparison.rows) {
      auto it = row.report.per_label.find(label);
      out << std::setw(static_cast<int>(col))
          << (it == row.report.per_label.end() ? std::string("-") : percent(it->second.f1));
    }
    out << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width)) << "Micro-Avg" << std::right;
  for (const auto& row : comparison.rows) {
    out << std::setw(static_cast<int>(col)) << percent(row.report.micro.f1);
  }
  out << '\n';
}

}  // namespace clozener
