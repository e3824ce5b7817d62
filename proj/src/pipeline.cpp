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

#include "labelproj/pipeline.hpp"

#include <atomic>
#include <algorithm>
#include <cstdlib>
#include <optional>
#include <thread>

#include "labelproj/baselines.hpp"
#include "labelproj/clap.hpp"
#include "labelproj/errors.hpp"
#include "labelproj/unicode.hpp"

namespace labelproj {

RunOutcome project_corpus(const Corpus& corpus,
                          const std::function<ProjectedDatapoint(const LabeledSentence&)>& project,
                          int max_concurrency) {
  const std::size_t n = corpus.sentences.size();
  std::vector<std::optional<ProjectedDatapoint>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        slots[i] = project(corpus.sentences[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  const int workers = std::max(1, std::min<int>(max_concurrency, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back(worker);
    }
    for (std::thread& t : threads) {
      t.join();
    }
  }

  RunOutcome outcome;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i] && !outcome.first_error) {
      outcome.first_error = errors[i];
    }
    if (slots[i]) {
      outcome.completed.push_back(std::move(*slots[i]));
    }
  }
  std::stable_sort(outcome.completed.begin(), outcome.completed.end(),
                   [](const ProjectedDatapoint& a, const ProjectedDatapoint& b) {
                     return a.source_ref < b.source_ref;
                   });
  return outcome;
}

BackendSet build_backends(const RunConfig& config) {
  BackendSet set;
  if (!config.cache_path.empty()) {
    set.cache = std::make_shared<ReplayCache>(config.cache_path,
                                              cache_mode_from_name(config.cache_mode));
  }
  const char* token_env = std::getenv("LABELPROJ_TOKEN");
  const std::string token = token_env ? token_env : "";

  auto build_remote_options = [&](const BackendConfig& backend) {
    RemoteOptions options;
    options.endpoint = backend.endpoint;
    options.backend_id = backend.id;
    options.timeout_ms = backend.timeout_ms;
    options.max_attempts = backend.max_attempts;
    options.backoff_ms = backend.backoff_ms;
    options.bearer_token = token;
    options.extra_params = backend.params;
    return options;
  };

  if (config.translator.present()) {
    if (config.translator.kind == "dict") {
      std::optional<PhraseTable> reverse;
      if (!config.translator.reverse_table.empty()) {
        reverse = PhraseTable::load(config.translator.reverse_table);
      }
      const std::string id =
          config.translator.id.empty() ? "dict:" + config.translator.table : config.translator.id;
      set.translator = std::make_unique<DictTranslator>(
          id, PhraseTable::load(config.translator.table), config.source_lang, config.target_lang,
          std::move(reverse));
    } else {
      set.translator = std::make_unique<HttpTranslator>(build_remote_options(config.translator),
                                                        set.cache);
    }
  }
  if (config.contextual.present()) {
    if (config.contextual.kind == "dict") {
      const std::string id =
          config.contextual.id.empty() ? "dict:" + config.contextual.table : config.contextual.id;
      set.contextual =
          std::make_unique<DictContextual>(id, PhraseTable::load(config.contextual.table));
    } else {
      set.contextual = std::make_unique<HttpContextual>(build_remote_options(config.contextual),
                                                        set.cache);
    }
  }
  return set;
}

RunOutcome run_projection(const RunConfig& config, const Corpus& corpus, BackendSet& backends,
                          const std::string& hash) {
  const Method method = method_from_name(config.method);
  Translator& translator = *backends.translator;
  const std::string& src = config.source_lang;
  const std::string& tgt = config.target_lang;

  switch (method) {
    case Method::clap: {
      std::vector<InContextExample> examples;
      if (!config.examples_path.empty()) {
        examples = load_incontext_examples(config.examples_path);
        if (static_cast<int>(examples.size()) < config.clap.num_incontext_examples) {
          throw ConfigError("examples file has " + std::to_string(examples.size()) +
                            " entries, config needs " +
                            std::to_string(config.clap.num_incontext_examples));
        }
        examples.resize(static_cast<std::size_t>(config.clap.num_incontext_examples));
      }
      ContextualTranslator& contextual = *backends.contextual;
      return project_corpus(
          corpus,
          [&, examples](const LabeledSentence& sentence) {
            return project_clap(sentence, translator, contextual, examples, config.clap, src, tgt,
                                hash);
          },
          config.max_concurrency);
    }
    case Method::marker: {
      const MarkerScheme scheme = MarkerScheme::parse(config.marker_scheme);
      return project_corpus(
          corpus,
          [&](const LabeledSentence& sentence) {
            return project_marker(sentence, translator, scheme, src, tgt, hash);
          },
          config.max_concurrency);
    }
    case Method::align: {
      std::vector<std::string> lines;
      std::optional<PhraseTable> lexicon;
      if (!config.alignment_path.empty()) {
        lines = read_alignment_lines(config.alignment_path);
        if (lines.size() != corpus.sentences.size()) {
          throw ValidationError("alignment file has " + std::to_string(lines.size()) +
                                " lines for " + std::to_string(corpus.sentences.size()) +
                                " sentences (line order must follow corpus order)");
        }
      } else {
        lexicon = PhraseTable::load(config.alignment_lexicon);
      }
      // Pharaoh lines pair with sentences by position; recover the index
      // from the element address.
      const LabeledSentence* base = corpus.sentences.data();
      return project_corpus(
          corpus,
          [&, base](const LabeledSentence& sentence) {
            const std::size_t index = static_cast<std::size_t>(&sentence - base);
            const std::string target_text =
                uni::normalize_nfc(translator.translate(sentence.text, src, tgt));
            AlignmentSet alignment =
                lexicon ? lexical_align(sentence.text, target_text, *lexicon)
                        : parse_pharaoh_line(lines[index], index + 1, sentence.text, target_text);
            return project_alignment(sentence, target_text, alignment, tgt,
                                     translator.backend_id(), hash);
          },
          config.max_concurrency);
    }
    case Method::independent:
      return project_corpus(
          corpus,
          [&](const LabeledSentence& sentence) {
            return project_independent(sentence, translator, src, tgt, hash);
          },
          config.max_concurrency);
    case Method::constrained:
      return project_corpus(
          corpus,
          [&](const LabeledSentence& sentence) {
            return project_constrained(sentence, translator, src, tgt, hash);
          },
          config.max_concurrency);
  }
  throw ConfigError("unreachable method dispatch");
}

}  // namespace labelproj
