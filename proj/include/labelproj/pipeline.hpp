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

#include <exception>
#include <functional>
#include <memory>
#include <vector>

#include "labelproj/backends.hpp"
#include "labelproj/config.hpp"
#include "labelproj/corpus.hpp"

namespace labelproj {

struct RunOutcome {
  std::vector<ProjectedDatapoint> completed;  // ordered by (doc_id, sent_id)
  std::exception_ptr first_error;             // error at the lowest input index, if any
};

/// Runs the per-sentence projector over the corpus with up to
/// max_concurrency workers. Output order is (doc_id, sent_id) regardless
/// of completion order. On error, no new sentences are started; finished
/// datapoints are kept so callers can emit partial output.
RunOutcome project_corpus(const Corpus& corpus,
                          const std::function<ProjectedDatapoint(const LabeledSentence&)>& project,
                          int max_concurrency);

struct BackendSet {
  std::shared_ptr<ReplayCache> cache;
  std::unique_ptr<Translator> translator;
  std::unique_ptr<ContextualTranslator> contextual;
};

/// Instantiates the configured backends. The bearer token for http
/// backends comes from the LABELPROJ_TOKEN environment variable.
BackendSet build_backends(const RunConfig& config);

/// Dispatches the configured method over the corpus: loads whatever the
/// method needs (in-context examples, alignments), projects every
/// sentence, and stamps provenance with the given config hash.
RunOutcome run_projection(const RunConfig& config, const Corpus& corpus, BackendSet& backends,
                          const std::string& hash);

}  // namespace labelproj
