// Copyright 2026 The labelproj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "labelproj/backends.hpp"
#include "labelproj/corpus.hpp"

namespace labelproj {

/// Overridable via config. {label} and {context} are required placeholders;
/// {src_lang} and {tgt_lang} are optional.
inline constexpr std::string_view kDefaultInstructionTemplate =
    "Translate the phrase '{label}' from {src_lang} to {tgt_lang} such that your translation "
    "is an exact substring of the following {tgt_lang} sentence. Sentence: {context}. Answer "
    "with the translated phrase only.";

struct MatchingPolicy {
  bool casefold = false;  // simple per-code-point folding on both sides
};

struct ClapConfig {
  int num_incontext_examples = 2;
  int max_attempts = 1;
  double backtranslation_threshold = 0.5;
  std::uint64_t example_seed = 0;
  MatchingPolicy matching;
  std::string instruction_template = std::string(kDefaultInstructionTemplate);
};

struct PromptExample {
  std::string context;
  std::string source_label;
  std::string projected_label;
};

struct PromptSpec {
  std::string instruction;
  std::vector<PromptExample> examples;
  std::string query_label;
  std::string context;
  std::string src_lang;
  std::string tgt_lang;
};

struct InContextExample {
  std::string context;
  std::string source_label;
  std::string projected_label;
  std::string backtranslation;
  double similarity = 0.0;
};

/// Renders instruction blocks joined by blank lines: one block per
/// in-context example (template rendered with the example's label and
/// context, then the projected label on its own line), then the query
/// block. Raises TemplateError on missing/unknown placeholders,
/// ValidationError when an example's projected label is not inside its
/// context.
std::string build_prompt(const PromptSpec& spec);

/// First non-empty line, trimmed, one layer of matching straight or
/// typographic quotes stripped, NFC-normalized. Raises
/// EmptyCandidateError when nothing remains.
std::string parse_completion(std::string_view raw);

/// Exact code-point search of NFC(candidate) in target_text (both sides
/// simple-casefolded under policy.casefold). Returns the first occurrence
/// that does not overlap any span in `taken`; if every occurrence
/// overlaps, the first occurrence; absent when there is none.
std::optional<Span> find_label_span(std::string_view candidate, std::string_view target_text,
                                    const std::vector<Span>& taken, const MatchingPolicy& policy);

/// F1 over multiset character n-grams with count clipping; 0 when either
/// side has no n-gram of this order.
double ngram_f1(std::string_view a, std::string_view b, std::size_t n);
double ngram_f1(std::u32string_view a, std::u32string_view b, std::size_t n);

/// Mean of ngram_f1 for n = 1..min(4, length of the shorter string);
/// 0 when either string is empty.
double chr_sim(std::string_view a, std::string_view b);
double chr_sim(std::u32string_view a, std::u32string_view b);

/// Walks the pool in seeded-shuffle order, producing zero-shot candidates
/// and keeping only those that land in the translated sentence and whose
/// back-translation stays chr_sim-close to the source label. Raises
/// InsufficientExamplesError when the pool runs out first.
std::vector<InContextExample> generate_incontext_examples(const Corpus& pool, Translator& translator,
                                                          ContextualTranslator& contextual,
                                                          const ClapConfig& config,
                                                          const std::string& src_lang,
                                                          const std::string& tgt_lang);

/// Translates the sentence once, then contextually translates each label
/// with the translated sentence as context. Labels are processed in span
/// order; labels sharing an identical source span reuse one candidate.
ProjectedDatapoint project_clap(const LabeledSentence& sentence, Translator& translator,
                                ContextualTranslator& contextual,
                                const std::vector<InContextExample>& examples,
                                const ClapConfig& config, const std::string& src_lang,
                                const std::string& tgt_lang, const std::string& config_hash = "");

std::vector<InContextExample> load_incontext_examples(const std::filesystem::path& path);
void save_incontext_examples(const std::vector<InContextExample>& examples,
                             const std::filesystem::path& path);

}  // namespace labelproj
