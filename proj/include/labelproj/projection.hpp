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

#include <string>
#include <vector>

#include "labelproj/corpus.hpp"

namespace labelproj {

/// Rebuilds the event structure over the target text from projection
/// records: unfaithful arguments are dropped, and a frame whose trigger
/// is unfaithful is dropped entirely (a frame cannot exist without its
/// trigger). Re-anchored surfaces are slices of the target text.
std::vector<EventFrame> assemble_target_events(const LabeledSentence& source,
                                               const std::string& target_text,
                                               const std::vector<ProjectionRecord>& records);

/// Bundles records into a datapoint; datapoint_faithful is the
/// conjunction over records (vacuously true with zero labels).
ProjectedDatapoint make_datapoint(const LabeledSentence& source, const std::string& target_lang,
                                  const std::string& target_text,
                                  std::vector<ProjectionRecord> records, Method method,
                                  const std::string& translator_id,
                                  const std::string& contextual_id,
                                  const std::string& config_hash);

}  // namespace labelproj
