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

#include "clozener/prompt.h"

#include <algorithm>
#include <cctype>

#include "clozener/error.h"

namespace clozener {
namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string replace_once(std::string text, std::string_view needle, std::string_view value) {
  auto pos = text.find(needle);
  if (pos != std::string::npos) text.replace(pos, needle.size(), value);
  return text;
}

std::string join_context(std::string_view sentence_text, std::string_view rendered) {
  if (sentence_text.empty()) return std::string(rendered);
  std::string out(sentence_text);
  out += ' ';
  out += rendered;
  return out;
}

}  // namespace

const char* to_string(PromptMode mode) {
  return mode == PromptMode::kMasked ? "masked" : "causal";
}

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "masked") return PromptMode::kMasked;
  if (name == "causal") return PromptMode::kCausal;
  throw ConfigError("unknown prompt mode '" + std::string(name) + "'");
}

const std::vector<Template>& builtin_catalog() {
  static const std::vector<Template> kCatalog = {
      {"T1", "[TOKEN] is a [MASK]."},
      {"T2", "[TOKEN] was a [MASK]."},
      {"T3", "[TOKEN] would be a [MASK]."},
      {"T4", "[TOKEN] a [MASK]."},
      {"T5", "[TOKEN] [MASK]."},
      {"T6", "[TOKEN] is an example of a [MASK]."},
      {"T7", "[TOKEN] is an instance of a [MASK]."},
      {"T8", "[TOKEN] denotes a [MASK]."},
      {"T9", "[TOKEN] is well-known to be a [MASK]."},
      {"T10", "Many people consider [TOKEN] to be a [MASK]."},
      {"T11", "[TOKEN] is a common [MASK] known to many people."},
      {"T12", "There are many [MASK]s but [TOKEN] stands out nevertheless."},
      {"T13", "A [MASK] like [TOKEN] is often mentioned in conversations."},
      {"T14", "A [MASK] like [TOKEN]."},
      {"T15", "This [MASK], [TOKEN], is worth discussing."},
  };
  return kCatalog;
}

const Template& catalog_template(std::string_view id) {
  const auto& catalog = builtin_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const Template& t) { return t.id == id; });
  if (it == catalog.end()) throw NotFoundError("unknown template id '" + std::string(id) + "'");
  return *it;
}

Template parse_template(std::string_view pattern, std::string_view id) {
  for (auto placeholder : {kTokenPlaceholder, kMaskPlaceholder}) {
    const auto n = count_occurrences(pattern, placeholder);
    if (n == 0) {
      throw ValidationError("template " + std::string(id) + ": missing " +
                            std::string(placeholder));
    }
    if (n > 1) {
      throw ValidationError("template " + std::string(id) + ": duplicate " +
                            std::string(placeholder));
    }
  }
  return Template{std::string(id), std::string(pattern)};
}

Prompt instantiate_masked(const Template& tmpl, std::string_view span_surface,
                          std::string_view sentence_text, std::string_view mask_sentinel) {
  if (span_surface.empty()) throw ArgumentError("span surface must not be empty");
  std::string rendered = replace_once(tmpl.pattern, kTokenPlaceholder, span_surface);
  rendered = replace_once(std::move(rendered), kMaskPlaceholder, mask_sentinel);
  return Prompt{join_context(sentence_text, rendered), PromptMode::kMasked,
                std::string(mask_sentinel)};
}

Prompt instantiate_causal(const Template& tmpl, std::string_view span_surface,
                          std::string_view sentence_text) {
  if (span_surface.empty()) throw ArgumentError("span surface must not be empty");
  const std::string_view pattern = tmpl.pattern;
  const auto token_pos = pattern.find(kTokenPlaceholder);
  const auto mask_pos = pattern.find(kMaskPlaceholder);
  if (token_pos == std::string_view::npos || mask_pos == std::string_view::npos) {
    throw UnsupportedTemplateError("template " + tmpl.id + " lacks placeholders");
  }
  if (mask_pos < token_pos) {
    throw UnsupportedTemplateError("template " + tmpl.id +
                                   ": [MASK] precedes [TOKEN], not usable in causal mode");
  }
  auto tail = pattern.substr(mask_pos + kMaskPlaceholder.size());
  bool tail_is_punct = std::all_of(tail.begin(), tail.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c));
  });
  if (!tail_is_punct) {
    throw UnsupportedTemplateError("template " + tmpl.id +
                                   ": [MASK] is not pattern-final, not usable in causal mode");
  }

  std::string head(pattern.substr(0, mask_pos));
  head = replace_once(std::move(head), kTokenPlaceholder, span_surface);
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) head.pop_back();
  return Prompt{join_context(sentence_text, head), PromptMode::kCausal, {}};
}

}  // namespace clozener
