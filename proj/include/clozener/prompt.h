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

#ifndef CLOZENER_PROMPT_H_
#define CLOZENER_PROMPT_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace clozener {

inline constexpr std::string_view kTokenPlaceholder = "[TOKEN]";
inline constexpr std::string_view kMaskPlaceholder = "[MASK]";

// A cloze pattern holding exactly one [TOKEN] and one [MASK].
struct Template {
  std::string id;
  std::string pattern;
};

enum class PromptMode { kMasked, kCausal };

const char* to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view name);

struct Prompt {
  std::string text;
  PromptMode mode = PromptMode::kMasked;
  std::string mask_sentinel;  // empty in causal mode
};

// T1..T15, the templates compared in the zero-shot experiments. Ordered by
// numeric id.
const std::vector<Template>& builtin_catalog();
const Template& catalog_template(std::string_view id);

// Throws ValidationError when a placeholder is missing or repeated.
Template parse_template(std::string_view pattern, std::string_view id);

// "<sentence> <pattern with [TOKEN] and [MASK] substituted>".
Prompt instantiate_masked(const Template& tmpl, std::string_view span_surface,
                          std::string_view sentence_text, std::string_view mask_sentinel);

// Same prefix, but the pattern is cut at [MASK] so the backend predicts the
// next word. Only templates whose [MASK] follows [TOKEN] and ends the pattern
// (ignoring trailing punctuation) are accepted.
Prompt instantiate_causal(const Template& tmpl, std::string_view span_surface,
                          std::string_view sentence_text);

}  // namespace clozener

#endif  // CLOZENER_PROMPT_H_
