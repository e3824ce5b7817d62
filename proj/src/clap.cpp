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

#include "labelproj/clap.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "labelproj/errors.hpp"
#include "labelproj/projection.hpp"
#include "labelproj/rand_util.hpp"
#include "labelproj/unicode.hpp"

namespace labelproj {

namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::vector<std::string> template_placeholders(std::string_view tpl) {
  std::vector<std::string> names;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tpl.size() && is_placeholder_char(tpl[j])) {
      ++j;
    }
    if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
      names.emplace_back(tpl.substr(i + 1, j - i - 1));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return names;
}

// Single pass over the template; substituted values are never re-scanned.
std::string render_template(std::string_view tpl, const std::string& label,
                            const std::string& context, const std::string& src_lang,
                            const std::string& tgt_lang) {
  std::string out;
  out.reserve(tpl.size() + label.size() + context.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      out.push_back(tpl[i]);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tpl.size() && is_placeholder_char(tpl[j])) {
      ++j;
    }
    if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
      const std::string_view name = tpl.substr(i + 1, j - i - 1);
      if (name == "label") {
        out += label;
      } else if (name == "context") {
        out += context;
      } else if (name == "src_lang") {
        out += src_lang;
      } else if (name == "tgt_lang") {
        out += tgt_lang;
      } else {
        throw TemplateError("unresolved placeholder {" + std::string(name) + "} in template");
      }
      i = j + 1;
    } else {
      out.push_back(tpl[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string build_prompt(const PromptSpec& spec) {
  const std::vector<std::string> names = template_placeholders(spec.instruction);
  const std::set<std::string> name_set(names.begin(), names.end());
  if (name_set.count("label") == 0) {
    throw TemplateError("template missing {label} placeholder");
  }
  if (name_set.count("context") == 0) {
    throw TemplateError("template missing {context} placeholder");
  }
  for (const std::string& name : names) {
    if (name != "label" && name != "context" && name != "src_lang" && name != "tgt_lang") {
      throw TemplateError("unresolved placeholder {" + name + "} in template");
    }
  }

  std::string prompt;
  for (const PromptExample& example : spec.examples) {
    if (example.context.find(example.projected_label) == std::string::npos) {
      throw ValidationError("in-context example projected label \"" + example.projected_label +
                            "\" is not a substring of its context");
    }
    prompt += render_template(spec.instruction, example.source_label, example.context,
                              spec.src_lang, spec.tgt_lang);
    prompt += '\n';
    prompt += example.projected_label;
    prompt += "\n\n";
  }
  prompt += render_template(spec.instruction, spec.query_label, spec.context, spec.src_lang,
                            spec.tgt_lang);
  return prompt;
}

std::string parse_completion(std::string_view raw) {
  std::string_view line;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t nl = raw.find('\n', pos);
    const std::size_t end = (nl == std::string_view::npos) ? raw.size() : nl;
    line = raw.substr(pos, end - pos);
    if (!uni::trim(line).empty()) {
      break;
    }
    line = {};
    if (nl == std::string_view::npos) {
      break;
    }
    pos = nl + 1;
  }

  std::u32string cps = uni::to_utf32(uni::trim(line));
  static constexpr std::pair<char32_t, char32_t> kQuotePairs[] = {
      {U'"', U'"'}, {U'\'', U'\''}, {U'“', U'”'}, {U'‘', U'’'}};
  if (cps.size() >= 2) {
    for (const auto& [open, close] : kQuotePairs) {
      if (cps.front() == open && cps.back() == close) {
        cps = cps.substr(1, cps.size() - 2);
        break;
      }
    }
  }
  const std::string candidate = uni::normalize_nfc(uni::trim(uni::to_utf8(cps)));
  if (candidate.empty()) {
    throw EmptyCandidateError("completion is empty after stripping");
  }
  return candidate;
}

std::optional<Span> find_label_span(std::string_view candidate, std::string_view target_text,
                                    const std::vector<Span>& taken,
                                    const MatchingPolicy& policy) {
  std::u32string needle = uni::to_utf32(uni::normalize_nfc(candidate));
  std::u32string hay = uni::to_utf32(target_text);
  if (needle.empty() || needle.size() > hay.size()) {
    return std::nullopt;
  }
  if (policy.casefold) {
    needle = uni::fold_case(needle);
    hay = uni::fold_case(hay);
  }

  std::optional<Span> first_occurrence;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::u32string_view(hay).substr(i, needle.size()) != needle) {
      continue;
    }
    const Span span{i, i + needle.size()};
    if (!first_occurrence) {
      first_occurrence = span;
    }
    const bool clashes = std::any_of(taken.begin(), taken.end(),
                                     [&](const Span& t) { return span.overlaps(t); });
    if (!clashes) {
      return span;
    }
  }
  return first_occurrence;
}

double ngram_f1(std::u32string_view a, std::u32string_view b, std::size_t n) {
  if (n < 1) {
    throw Error("n-gram order must be >= 1");
  }
  if (a.size() < n || b.size() < n) {
    return 0.0;
  }
  std::map<std::u32string, int> grams_a;
  for (std::size_t i = 0; i + n <= a.size(); ++i) {
    ++grams_a[std::u32string(a.substr(i, n))];
  }
  std::map<std::u32string, int> grams_b;
  for (std::size_t i = 0; i + n <= b.size(); ++i) {
    ++grams_b[std::u32string(b.substr(i, n))];
  }
  std::size_t matches = 0;
  for (const auto& [gram, count] : grams_a) {
    auto it = grams_b.find(gram);
    if (it != grams_b.end()) {
      matches += static_cast<std::size_t>(std::min(count, it->second));
    }
  }
  const double total_a = static_cast<double>(a.size() - n + 1);
  const double total_b = static_cast<double>(b.size() - n + 1);
  const double precision = static_cast<double>(matches) / total_a;
  const double recall = static_cast<double>(matches) / total_b;
  if (precision + recall == 0.0) {
    return 0.0;
  }
  return 2.0 * precision * recall / (precision + recall);
}

double ngram_f1(std::string_view a, std::string_view b, std::size_t n) {
  return ngram_f1(std::u32string_view(uni::to_utf32(a)), std::u32string_view(uni::to_utf32(b)),
                  n);
}

double chr_sim(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) {
    return 0.0;
  }
  const std::size_t max_n = std::min<std::size_t>(4, std::min(a.size(), b.size()));
  double sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    sum += ngram_f1(a, b, n);
  }
  return sum / static_cast<double>(max_n);
}

double chr_sim(std::string_view a, std::string_view b) {
  return chr_sim(std::u32string_view(uni::to_utf32(a)), std::u32string_view(uni::to_utf32(b)));
}

std::vector<InContextExample> generate_incontext_examples(const Corpus& pool,
                                                          Translator& translator,
                                                          ContextualTranslator& contextual,
                                                          const ClapConfig& config,
                                                          const std::string& src_lang,
                                                          const std::string& tgt_lang) {
  if (pool.sentences.empty()) {
    throw ValidationError("in-context example pool is empty");
  }
  const int wanted = config.num_incontext_examples;
  std::vector<InContextExample> accepted;
  if (wanted <= 0) {
    return accepted;
  }

  const std::vector<std::size_t> order =
      seeded_index_order(pool.sentences.size(), config.example_seed);
  for (const std::size_t idx : order) {
    const LabeledSentence& sentence = pool.sentences[idx];
    const std::vector<const Label*> labels = labels_in_span_order(sentence);
    if (labels.empty()) {
      continue;
    }
    const std::string target_text =
        uni::normalize_nfc(translator.translate(sentence.text, src_lang, tgt_lang));
    for (const Label* label : labels) {
      PromptSpec spec;
      spec.instruction = config.instruction_template;
      spec.query_label = label->surface;
      spec.context = target_text;
      spec.src_lang = src_lang;
      spec.tgt_lang = tgt_lang;
      std::string candidate;
      try {
        candidate = parse_completion(contextual.complete(build_prompt(spec)));
      } catch (const EmptyCandidateError&) {
        continue;
      }
      if (!find_label_span(candidate, target_text, {}, config.matching)) {
        continue;
      }
      const std::string backtranslation =
          uni::normalize_nfc(translator.translate(candidate, tgt_lang, src_lang));
      const double similarity = chr_sim(backtranslation, label->surface);
      if (similarity < config.backtranslation_threshold) {
        continue;
      }
      accepted.push_back(
          InContextExample{target_text, label->surface, candidate, backtranslation, similarity});
      if (static_cast<int>(accepted.size()) == wanted) {
        return accepted;
      }
    }
  }
  throw InsufficientExamplesError(
      "pool exhausted after accepting " + std::to_string(accepted.size()) + " of " +
          std::to_string(wanted) + " in-context examples",
      static_cast<int>(accepted.size()), wanted);
}

ProjectedDatapoint project_clap(const LabeledSentence& sentence, Translator& translator,
                                ContextualTranslator& contextual,
                                const std::vector<InContextExample>& examples,
                                const ClapConfig& config, const std::string& src_lang,
                                const std::string& tgt_lang, const std::string& config_hash) {
  if (static_cast<int>(examples.size()) != config.num_incontext_examples) {
    throw ValidationError("got " + std::to_string(examples.size()) +
                          " in-context examples, config expects " +
                          std::to_string(config.num_incontext_examples));
  }
  PromptSpec base;
  base.instruction = config.instruction_template;
  base.src_lang = src_lang;
  base.tgt_lang = tgt_lang;
  for (const InContextExample& example : examples) {
    base.examples.push_back(
        PromptExample{example.context, example.source_label, example.projected_label});
  }

  std::string target_text;
  try {
    target_text = uni::normalize_nfc(translator.translate(sentence.text, src_lang, tgt_lang));
  } catch (const BackendError& e) {
    throw BackendError("sentence " + sentence.sent_id + ": " + e.what(), e.key_digest());
  }

  std::vector<ProjectionRecord> records;
  std::vector<Span> taken;
  std::map<Span, std::size_t> by_source_span;

  for (const Label* label : labels_in_span_order(sentence)) {
    ProjectionRecord record;
    record.label_id = label->label_id;
    record.method = Method::clap;

    auto shared = by_source_span.find(label->span);
    if (shared != by_source_span.end()) {
      const ProjectionRecord& original = records[shared->second];
      record.candidate = original.candidate;
      record.matched_span = original.matched_span;
      record.faithful = original.faithful;
      record.attempts = original.attempts;
      record.diagnostics.push_back("reused candidate computed for label \"" + original.label_id +
                                   "\" (identical source span)");
      records.push_back(std::move(record));
      continue;
    }

    PromptSpec spec = base;
    spec.query_label = label->surface;
    spec.context = target_text;
    const std::string prompt = build_prompt(spec);

    for (int attempt = 1; attempt <= std::max(1, config.max_attempts); ++attempt) {
      record.attempts = attempt;
      std::string raw;
      try {
        raw = contextual.complete(prompt);
      } catch (const BackendError& e) {
        throw BackendError("sentence " + sentence.sent_id + " label " + label->label_id + ": " +
                               e.what(),
                           e.key_digest());
      }
      std::string candidate;
      try {
        candidate = parse_completion(raw);
      } catch (const EmptyCandidateError&) {
        record.diagnostics.push_back("attempt " + std::to_string(attempt) +
                                     ": empty completion");
        continue;
      }
      record.candidate = candidate;
      const std::optional<Span> span =
          find_label_span(candidate, target_text, taken, config.matching);
      if (span) {
        record.matched_span = span;
        record.faithful = true;
        break;
      }
      record.diagnostics.push_back("attempt " + std::to_string(attempt) + ": candidate \"" +
                                   candidate + "\" is not a substring of the target sentence");
    }
    if (record.faithful) {
      taken.push_back(*record.matched_span);
    }
    by_source_span.emplace(label->span, records.size());
    records.push_back(std::move(record));
  }

  return make_datapoint(sentence, tgt_lang, target_text, std::move(records), Method::clap,
                        translator.backend_id(), contextual.backend_id(), config_hash);
}

std::vector<InContextExample> load_incontext_examples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open in-context examples " + path.string());
  }
  std::vector<InContextExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    InContextExample example;
    example.context = j.value("context", "");
    example.source_label = j.value("source_label", "");
    example.projected_label = j.value("projected_label", "");
    example.backtranslation = j.value("backtranslation", "");
    example.similarity = j.value("similarity", 0.0);
    if (example.context.empty() || example.projected_label.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": example needs context and projected_label");
    }
    if (example.context.find(example.projected_label) == std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": projected_label is not a substring of context");
    }
    examples.push_back(std::move(example));
  }
  return examples;
}

void save_incontext_examples(const std::vector<InContextExample>& examples,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write in-context examples " + path.string());
  }
  for (const InContextExample& example : examples) {
    nlohmann::ordered_json j;
    j["context"] = example.context;
    j["source_label"] = example.source_label;
    j["projected_label"] = example.projected_label;
    j["backtranslation"] = example.backtranslation;
    j["similarity"] = example.similarity;
    out << j.dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace labelproj
