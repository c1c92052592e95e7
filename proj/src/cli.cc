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

#include "clozener/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "clozener/ensemble.h"
#include "clozener/error.h"
#include "clozener/hash.h"
#include "clozener/lexicon.h"

namespace clozener::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
T get_as(const json& doc, const char* key, const char* where) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config ") + where + "." + key + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("config " + where + ": unknown key '" + key + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid threshold '" + item + "' in --grid");
    }
  }
  return grid;
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(i * 0.05);
  return grid;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is empty");
  if (!fs::exists(path)) throw ConfigError(what + " '" + path + "' does not exist");
}

ordered_json meta(const EngineConfig& config, const MaskBackend* backend,
                  const std::string& command) {
  ordered_json m;
  m["tool"] = "clozener";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = config.hash();
  m["model"] = backend ? backend->model_id() : "none";
  m["seed"] = config.seed;
  m["template"] = config.selected_template().id;
  m["aggregation"] = to_string(config.labeler.aggregation);
  return m;
}

void write_header(std::ostream& err, const ordered_json& m) {
  err << "# clozener " << m["command"].get<std::string>()
      << " config_hash=" << m["config_hash"].get<std::string>()
      << " model=" << m["model"].get<std::string>() << " seed=" << m["seed"].dump() << '\n';
}

// Writes to the file when a path is given, else to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot open output file '" + path + "'");
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *stream_; }
  bool to_file() const { return !path_.empty(); }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

Dataset load_corpus(const std::string& path, const ColumnSpec& columns, std::ostream& err) {
  if (path.empty()) throw ConfigError("--input is required");
  auto parsed = parse_conll_file(path, columns);
  if (parsed.iob_repairs > 0) {
    err << "warning: " << parsed.iob_repairs << " IOB repair(s) in " << path << '\n';
  }
  return std::move(parsed.dataset);
}

LabelLexicon load_selected_lexicon(const EngineConfig& config, std::ostream& err) {
  if (config.lexicon == "builtin") return builtin_lexicon();
  auto loaded = load_lexicon_file(config.lexicon);
  for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
  return std::move(loaded.lexicon);
}

struct Flags {
  std::string config;
  std::string input;
  std::string output;
  std::string template_spec;
  std::string backend;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double p_h = 0.0;
  std::string grid;
  std::string labels;
  std::string predictions;
  std::string secondary;
  std::string format;
  std::string lexicon;
  std::string templates;
  std::string aggregation;
  double abstain_below = 0.0;
  std::size_t top_m = 8;
  std::size_t k = 0;
  std::string sample_mode;
};

void add_common_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON engine config file");
  sub->add_option("--input", f.input, "CoNLL corpus (gold/dev/samples)");
  sub->add_option("--output", f.output, "output file (default stdout)");
  sub->add_option("--template", f.template_spec, "template id (T1..T15) or inline pattern");
  sub->add_option("--backend", f.backend, "stub:<fixtures.json> or http(s)://host:port");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--jobs", f.jobs, "worker threads for tagging")->check(CLI::PositiveNumber);
  sub->add_option("--p-h", f.p_h, "hybrid confidence threshold");
  sub->add_option("--grid", f.grid, "comma-separated thresholds for tuning");
  sub->add_option("--labels", f.labels, "comma-separated labels to evaluate");
  sub->add_option("--lexicon", f.lexicon, "'builtin' or a JSON lexicon file");
  sub->add_option("--aggregation", f.aggregation, "max or sum");
  sub->add_option("--abstain-below", f.abstain_below, "abstain when top score <= value");
  sub->add_option("--format", f.format, "jsonlines or conll");
}

bool given(const CLI::App& sub, const std::string& name) {
  const CLI::Option* opt = sub.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

EngineConfig effective_config(const CLI::App& sub, const Flags& f) {
  EngineConfig config = f.config.empty() ? EngineConfig{} : load_config(f.config);
  if (given(sub, "--template")) config.template_spec = f.template_spec;
  if (given(sub, "--backend")) apply_backend_flag(config.backend, f.backend);
  if (given(sub, "--seed")) config.seed = f.seed;
  if (given(sub, "--jobs")) config.jobs = f.jobs;
  if (given(sub, "--lexicon")) config.lexicon = f.lexicon;
  if (given(sub, "--aggregation")) config.labeler.aggregation = parse_aggregation(f.aggregation);
  if (given(sub, "--abstain-below")) config.labeler.abstain_below = f.abstain_below;
  if (given(sub, "--format")) config.output_format = parse_output_format(f.format);
  if (given(sub, "--labels")) {
    auto labels = split_list(f.labels);
    config.eval_labels = std::set<std::string>(labels.begin(), labels.end());
  }
  if (given(sub, "--p-h") || given(sub, "--grid") || given(sub, "--secondary")) {
    if (!config.hybrid) config.hybrid = HybridConfig{};
    if (given(sub, "--p-h")) config.hybrid->p_h = f.p_h;
    if (given(sub, "--grid")) config.hybrid->grid = parse_grid(f.grid);
    if (given(sub, "--secondary")) config.hybrid->secondary = f.secondary;
  }
  if (given(sub, "--top-m")) config.derive.top_m = f.top_m;
  if (given(sub, "--k")) config.derive.k = f.k;
  if (given(sub, "--sample-mode")) config.derive.sample_mode = parse_sample_mode(f.sample_mode);
  return config;
}

int cmd_tag(const EngineConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  config.validate();
  const Dataset dataset = load_corpus(f.input, config.columns, err);
  const LabelLexicon lexicon = load_selected_lexicon(config, err);
  const Template tmpl = config.selected_template();
  auto backend = make_backend(config.backend);

  auto predictions = tag_dataset(dataset, tmpl, *backend, lexicon, config.detector,
                                 config.labeler, config.jobs);
  if (config.hybrid && !config.hybrid->secondary.empty()) {
    if (!config.hybrid->p_h) throw ConfigError("hybrid tagging needs --p-h (or hybrid.p_h)");
    auto secondary = read_secondary_file(config.hybrid->secondary, dataset);
    predictions = combine_dataset(dataset, predictions, secondary, *config.hybrid->p_h);
  }

  const auto m = meta(config, backend.get(), "tag");
  write_header(err, m);
  Sink sink(f.output, out);
  write_predictions(sink.stream(), dataset, predictions, config.output_format);
  if (sink.to_file()) {
    std::ofstream meta_file(f.output + ".meta.json", std::ios::binary);
    meta_file << m.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const EngineConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  const Dataset gold = load_corpus(f.input, config.columns, err);
  if (f.predictions.empty()) throw ConfigError("eval needs --predictions");
  std::ifstream in(f.predictions);
  if (!in) throw ConfigError("cannot open predictions file '" + f.predictions + "'");

  PredictionMap predictions;
  if (config.output_format == OutputFormat::kConll) {
    ColumnSpec two_col{0, std::nullopt, std::nullopt};
    auto parsed = parse_conll(in, two_col, "predictions");
    if (parsed.dataset.sentences.size() != gold.sentences.size()) {
      throw Error("conll predictions have " + std::to_string(parsed.dataset.sentences.size()) +
                  " sentences, gold has " + std::to_string(gold.sentences.size()));
    }
    for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
      auto& preds = predictions[gold.sentences[i].id];
      const Sentence& s = parsed.dataset.sentences[i];
      for (const auto& g : s.gold) {
        preds.push_back(Prediction{{g.start, g.end, span_surface(s, g.start, g.end)},
                                   g.label, 1.0, {}, PredictionSource::kBase});
      }
    }
  } else {
    predictions = read_predictions_jsonl(in, gold);
  }

  const EvalReport report = span_f1(gold, predictions, config.eval_labels);
  ordered_json doc;
  doc["meta"] = meta(config, nullptr, "eval");
  doc["report"] = to_json(report);
  if (!f.output.empty()) {
    Sink sink(f.output, out);
    sink.stream() << doc.dump(2) << '\n';
  }
  write_report_table(out, report);
  return kExitOk;
}

int cmd_compare(const EngineConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  config.validate();
  std::vector<std::string> ids;
  if (f.templates.empty()) {
    for (const auto& t : builtin_catalog()) ids.push_back(t.id);
  } else {
    ids = split_list(f.templates);
  }
  if (ids.empty()) throw ConfigError("--templates must name at least one template");
  resolve_templates(ids, config.user_templates);

  const Dataset dataset = load_corpus(f.input, config.columns, err);
  const LabelLexicon lexicon = load_selected_lexicon(config, err);
  auto backend = make_backend(config.backend);
  auto comparison = compare_templates(dataset, ids, config.user_templates, *backend, lexicon,
                                      config.detector, config.labeler, config.eval_labels,
                                      config.jobs);

  ordered_json doc;
  doc["meta"] = meta(config, backend.get(), "compare-templates");
  doc["rows"] = to_json(comparison);
  write_header(err, doc["meta"]);
  if (!f.output.empty()) {
    Sink sink(f.output, out);
    sink.stream() << doc.dump(2) << '\n';
  }
  write_comparison_table(out, comparison);
  return kExitOk;
}

int cmd_tune(const EngineConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  const Dataset dev = load_corpus(f.input, config.columns, err);
  if (!config.hybrid || config.hybrid->secondary.empty()) {
    throw ConfigError("tune-threshold needs --secondary (or hybrid.secondary)");
  }
  require_file(config.hybrid->secondary, "secondary predictions file");
  auto secondary = read_secondary_file(config.hybrid->secondary, dev);

  std::unique_ptr<MaskBackend> backend;
  std::vector<std::vector<Prediction>> base;
  if (!f.predictions.empty()) {
    std::ifstream in(f.predictions);
    if (!in) throw ConfigError("cannot open predictions file '" + f.predictions + "'");
    auto map = read_predictions_jsonl(in, dev);
    for (const auto& s : dev.sentences) {
      auto it = map.find(s.id);
      base.push_back(it == map.end() ? std::vector<Prediction>{} : it->second);
    }
  } else {
    config.validate();
    backend = make_backend(config.backend);
    base = tag_dataset(dev, config.selected_template(), *backend,
                       load_selected_lexicon(config, err), config.detector, config.labeler,
                       config.jobs);
  }

  auto grid = config.hybrid->grid.empty() ? default_grid() : config.hybrid->grid;
  auto tuning = tune_threshold(dev, base, secondary, grid, config.eval_labels);

  ordered_json doc;
  doc["meta"] = meta(config, backend.get(), "tune-threshold");
  doc["tuning"] = to_json(tuning);
  write_header(err, doc["meta"]);
  if (!f.output.empty()) {
    Sink sink(f.output, out);
    sink.stream() << doc.dump(2) << '\n';
  }
  out << "p_h\tmicro_f1\n";
  for (const auto& point : tuning.table) {
    out << format_threshold(point.p_h) << '\t' << point.report.micro.f1 << '\n';
  }
  out << "chosen p_h = " << format_threshold(tuning.p_h) << " (micro F1 " << tuning.f1 << ")\n";
  return kExitOk;
}

int cmd_derive(const EngineConfig& config, const Flags& f, std::ostream& out, std::ostream& err) {
  config.validate();
  Dataset samples = load_corpus(f.input, config.columns, err);
  if (config.derive.k) {
    auto sampled = few_shot_sample(samples, config.derive.sample_mode, *config.derive.k, config.seed);
    for (const auto& w : sampled.warnings) err << "warning: " << w << '\n';
    samples = std::move(sampled.dataset);
  }
  auto backend = make_backend(config.backend);
  auto derived = derive_from_data(samples, config.selected_template(), *backend, config.derive.top_m);
  for (const auto& w : derived.warnings) err << "warning: " << w << '\n';

  write_header(err, meta(config, backend.get(), "derive-lexicon"));
  Sink sink(f.output, out);
  write_lexicon(sink.stream(), derived.lexicon);
  return kExitOk;
}

}  // namespace

ordered_json EngineConfig::to_json() const {
  ordered_json j;
  ordered_json b;
  b["kind"] = backend.kind == BackendKind::kStub ? "stub" : "http";
  b["endpoint"] = backend.endpoint;
  b["fixtures"] = backend.fixtures;
  b["mask_sentinel"] = backend.mask_sentinel;
  b["mode"] = clozener::to_string(backend.mode);
  b["timeout_ms"] = backend.timeout.count();
  b["retries"] = backend.retries;
  b["backoff_ms"] = backend.backoff.count();
  b["max_in_flight"] = backend.max_in_flight;
  b["top_k"] = backend.top_k;
  j["backend"] = std::move(b);
  j["template"] = template_spec;
  ordered_json templates = ordered_json::array();
  for (const auto& t : user_templates) templates.push_back({{"id", t.id}, {"pattern", t.pattern}});
  j["templates"] = std::move(templates);
  j["lexicon"] = lexicon;
  j["detector"] = {{"candidate_pos", detector.candidate_pos},
                   {"include_numeric", detector.include_numeric},
                   {"numeric_pos", detector.numeric_pos}};
  j["aggregation"] = clozener::to_string(labeler.aggregation);
  j["abstain_below"] = labeler.abstain_below;
  ordered_json cols;
  cols["token"] = columns.token_col;
  cols["pos"] = columns.pos_col ? ordered_json(*columns.pos_col) : ordered_json(nullptr);
  cols["tag"] = columns.tag_col ? ordered_json(*columns.tag_col) : ordered_json("last");
  j["columns"] = std::move(cols);
  if (hybrid) {
    ordered_json h;
    h["secondary"] = hybrid->secondary;
    h["p_h"] = hybrid->p_h ? ordered_json(*hybrid->p_h) : ordered_json(nullptr);
    h["grid"] = hybrid->grid;
    j["hybrid"] = std::move(h);
  }
  if (eval_labels) j["eval"] = {{"labels", *eval_labels}};
  j["derive"] = {{"top_m", derive.top_m},
                 {"k", derive.k ? ordered_json(*derive.k) : ordered_json(nullptr)},
                 {"sample_mode", derive.sample_mode == SampleMode::kSentences
                                     ? "sentences"
                                     : "per_label_mentions"}};
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["output_format"] = output_format == OutputFormat::kConll ? "conll" : "jsonlines";
  return j;
}

std::string EngineConfig::hash() const {
  // jobs does not affect results.
  auto j = to_json();
  j.erase("jobs");
  return fnv1a_hex(j.dump());
}

Template EngineConfig::selected_template() const {
  if (template_spec.find(kTokenPlaceholder) != std::string::npos) {
    return parse_template(template_spec, "inline");
  }
  return resolve_templates({template_spec}, user_templates).front();
}

void EngineConfig::validate() const {
  backend.validate();
  if (backend.kind == BackendKind::kStub) require_file(backend.fixtures, "stub fixture file");
  if (lexicon != "builtin") require_file(lexicon, "lexicon file");
  if (hybrid && !hybrid->secondary.empty()) {
    require_file(hybrid->secondary, "secondary predictions file");
  }
  if (detector.candidate_pos.empty()) throw ConfigError("detector.candidate_pos is empty");
  if (labeler.abstain_below < 0.0 || labeler.abstain_below > 1.0) {
    throw ConfigError("abstain_below must be within [0,1]");
  }
  if (derive.top_m == 0) throw ConfigError("derive.top_m must be >= 1");
  if (jobs == 0) throw ConfigError("jobs must be >= 1");
  try {
    selected_template();
  } catch (const NotFoundError& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

EngineConfig config_from_json(const json& doc, const std::string& base_dir) {
  reject_unknown_keys(doc,
                      {"backend", "template", "templates", "lexicon", "detector", "aggregation",
                       "abstain_below", "columns", "hybrid", "eval", "derive", "seed", "jobs",
                       "output_format"},
                      "root");
  EngineConfig config;

  if (doc.contains("backend")) {
    const json& b = doc["backend"];
    reject_unknown_keys(b,
                        {"kind", "endpoint", "fixtures", "mask_sentinel", "mode", "timeout_ms",
                         "retries", "backoff_ms", "max_in_flight", "top_k"},
                        "backend");
    auto& bc = config.backend;
    if (b.contains("kind")) {
      auto kind = get_as<std::string>(b, "kind", "backend");
      if (kind == "stub") {
        bc.kind = BackendKind::kStub;
      } else if (kind == "http") {
        bc.kind = BackendKind::kHttp;
      } else {
        throw ConfigError("backend.kind must be 'stub' or 'http'");
      }
    }
    if (b.contains("endpoint")) bc.endpoint = get_as<std::string>(b, "endpoint", "backend");
    if (b.contains("fixtures")) {
      bc.fixtures = resolve_path(get_as<std::string>(b, "fixtures", "backend"), base_dir);
    }
    if (b.contains("mask_sentinel")) {
      bc.mask_sentinel = get_as<std::string>(b, "mask_sentinel", "backend");
    }
    if (b.contains("mode")) bc.mode = parse_prompt_mode(get_as<std::string>(b, "mode", "backend"));
    if (b.contains("timeout_ms")) {
      bc.timeout = std::chrono::milliseconds(get_as<unsigned>(b, "timeout_ms", "backend"));
    }
    if (b.contains("retries")) bc.retries = get_as<unsigned>(b, "retries", "backend");
    if (b.contains("backoff_ms")) {
      bc.backoff = std::chrono::milliseconds(get_as<unsigned>(b, "backoff_ms", "backend"));
    }
    if (b.contains("max_in_flight")) {
      bc.max_in_flight = get_as<std::size_t>(b, "max_in_flight", "backend");
    }
    if (b.contains("top_k")) bc.top_k = get_as<std::size_t>(b, "top_k", "backend");
  }

  if (doc.contains("templates")) {
    if (!doc["templates"].is_array()) throw ConfigError("config templates must be an array");
    for (const auto& t : doc["templates"]) {
      reject_unknown_keys(t, {"id", "pattern"}, "templates[]");
      auto id = get_as<std::string>(t, "id", "templates[]");
      auto pattern = get_as<std::string>(t, "pattern", "templates[]");
      try {
        config.user_templates.push_back(parse_template(pattern, id));
      } catch (const ValidationError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (doc.contains("template")) {
    const json& t = doc["template"];
    if (t.is_string()) {
      config.template_spec = t.get<std::string>();
    } else {
      reject_unknown_keys(t, {"id", "pattern"}, "template");
      auto id = get_as<std::string>(t, "id", "template");
      auto pattern = get_as<std::string>(t, "pattern", "template");
      try {
        config.user_templates.push_back(parse_template(pattern, id));
      } catch (const ValidationError& e) {
        throw ConfigError(e.what());
      }
      config.template_spec = id;
    }
  }

  if (doc.contains("lexicon")) {
    auto lex = get_as<std::string>(doc, "lexicon", "root");
    config.lexicon = lex == "builtin" ? lex : resolve_path(lex, base_dir);
  }

  if (doc.contains("detector")) {
    const json& d = doc["detector"];
    reject_unknown_keys(d, {"candidate_pos", "include_numeric", "numeric_pos"}, "detector");
    if (d.contains("candidate_pos")) {
      config.detector.candidate_pos = get_as<std::set<std::string>>(d, "candidate_pos", "detector");
    }
    if (d.contains("include_numeric")) {
      config.detector.include_numeric = get_as<bool>(d, "include_numeric", "detector");
    }
    if (d.contains("numeric_pos")) {
      config.detector.numeric_pos = get_as<std::set<std::string>>(d, "numeric_pos", "detector");
    }
  }

  if (doc.contains("aggregation")) {
    config.labeler.aggregation = parse_aggregation(get_as<std::string>(doc, "aggregation", "root"));
  }
  if (doc.contains("abstain_below")) {
    config.labeler.abstain_below = get_as<double>(doc, "abstain_below", "root");
  }

  if (doc.contains("columns")) {
    const json& c = doc["columns"];
    reject_unknown_keys(c, {"token", "pos", "tag"}, "columns");
    if (c.contains("token")) config.columns.token_col = get_as<std::size_t>(c, "token", "columns");
    if (c.contains("pos")) {
      config.columns.pos_col = c["pos"].is_null()
                                   ? std::nullopt
                                   : std::optional(get_as<std::size_t>(c, "pos", "columns"));
    }
    if (c.contains("tag")) {
      if (c["tag"].is_string() && c["tag"] == "last") {
        config.columns.tag_col.reset();
      } else {
        config.columns.tag_col = get_as<std::size_t>(c, "tag", "columns");
      }
    }
  }

  if (doc.contains("hybrid")) {
    const json& h = doc["hybrid"];
    reject_unknown_keys(h, {"secondary", "p_h", "grid"}, "hybrid");
    HybridConfig hybrid;
    if (h.contains("secondary")) {
      hybrid.secondary = resolve_path(get_as<std::string>(h, "secondary", "hybrid"), base_dir);
    }
    if (h.contains("p_h") && !h["p_h"].is_null()) hybrid.p_h = get_as<double>(h, "p_h", "hybrid");
    if (h.contains("grid")) hybrid.grid = get_as<std::vector<double>>(h, "grid", "hybrid");
    config.hybrid = std::move(hybrid);
  }

  if (doc.contains("eval")) {
    const json& e = doc["eval"];
    reject_unknown_keys(e, {"labels"}, "eval");
    if (e.contains("labels") && !e["labels"].is_null()) {
      config.eval_labels = get_as<std::set<std::string>>(e, "labels", "eval");
    }
  }

  if (doc.contains("derive")) {
    const json& d = doc["derive"];
    reject_unknown_keys(d, {"top_m", "k", "sample_mode"}, "derive");
    if (d.contains("top_m")) config.derive.top_m = get_as<std::size_t>(d, "top_m", "derive");
    if (d.contains("k") && !d["k"].is_null()) config.derive.k = get_as<std::size_t>(d, "k", "derive");
    if (d.contains("sample_mode")) {
      config.derive.sample_mode = parse_sample_mode(get_as<std::string>(d, "sample_mode", "derive"));
    }
  }

  if (doc.contains("seed")) config.seed = get_as<std::uint64_t>(doc, "seed", "root");
  if (doc.contains("jobs")) config.jobs = get_as<unsigned>(doc, "jobs", "root");
  if (doc.contains("output_format")) {
    config.output_format = parse_output_format(get_as<std::string>(doc, "output_format", "root"));
  }
  return config;
}

EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  try {
    return config_from_json(doc, fs::path(path).parent_path().string());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

void apply_backend_flag(BackendConfig& backend, const std::string& value) {
  if (value.rfind("stub:", 0) == 0) {
    backend.kind = BackendKind::kStub;
    backend.fixtures = value.substr(5);
  } else if (value.rfind("http://", 0) == 0 || value.rfind("https://", 0) == 0) {
    backend.kind = BackendKind::kHttp;
    backend.endpoint = value;
  } else {
    throw ConfigError("--backend must be stub:<file> or an http(s) URL, got '" + value + "'");
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (auto& a : storage) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"clozener: cloze-prompt named entity recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags f;

  auto* tag = app.add_subcommand("tag", "label candidate spans in a corpus");
  auto* eval = app.add_subcommand("eval", "score predictions against gold spans");
  auto* compare = app.add_subcommand("compare-templates", "F1 per template over a corpus");
  auto* tune = app.add_subcommand("tune-threshold", "grid-search the hybrid threshold p_h");
  auto* derive = app.add_subcommand("derive-lexicon", "derive representative words from samples");
  for (auto* sub : {tag, eval, compare, tune, derive}) add_common_flags(sub, f);
  tag->add_option("--secondary", f.secondary, "secondary classifier predictions (JSON-lines)");
  eval->add_option("--predictions", f.predictions, "predictions file")->required();
  compare->add_option("--templates", f.templates, "comma-separated template ids (default all)");
  tune->add_option("--secondary", f.secondary, "secondary classifier predictions (JSON-lines)");
  tune->add_option("--predictions", f.predictions, "base predictions (JSON-lines); tags if absent");
  derive->add_option("--top-m", f.top_m, "words kept per label")->check(CLI::PositiveNumber);
  derive->add_option("--k", f.k, "few-shot sample size before deriving")->check(CLI::PositiveNumber);
  derive->add_option("--sample-mode", f.sample_mode, "per_label_mentions or sentences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const EngineConfig config = effective_config(*sub, f);
    if (sub == tag) return cmd_tag(config, f, out, err);
    if (sub == eval) return cmd_eval(config, f, out, err);
    if (sub == compare) return cmd_compare(config, f, out, err);
    if (sub == tune) return cmd_tune(config, f, out, err);
    return cmd_derive(config, f, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BackendUnavailableError& e) {
    err << "backend unavailable: " << e.what() << '\n';
    return kExitBackendUnavailable;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kExitBackendError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace clozener::cli
