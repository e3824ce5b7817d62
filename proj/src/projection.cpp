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

#include "labelproj/projection.hpp"

#include <algorithm>
#include <unordered_map>

#include "labelproj/errors.hpp"

namespace labelproj {

std::vector<EventFrame> assemble_target_events(const LabeledSentence& source,
                                               const std::string& target_text,
                                               const std::vector<ProjectionRecord>& records) {
  std::unordered_map<std::string, const ProjectionRecord*> by_id;
  for (const ProjectionRecord& record : records) {
    by_id.emplace(record.label_id, &record);
  }
  auto record_for = [&](const Label& label) -> const ProjectionRecord* {
    auto it = by_id.find(label.label_id);
    if (it == by_id.end()) {
      throw Error("no projection record for label " + label.label_id);
    }
    return it->second;
  };

  std::vector<EventFrame> events;
  for (const EventFrame& event : source.events) {
    const ProjectionRecord* trigger_record = record_for(event.trigger);
    if (!trigger_record->faithful) {
      continue;
    }
    EventFrame target_event;
    target_event.event_type = event.event_type;
    target_event.trigger = Label{event.trigger.label_id, std::string(kTriggerRole),
                                 *trigger_record->matched_span,
                                 slice(target_text, *trigger_record->matched_span)};
    for (const Label& arg : event.arguments) {
      const ProjectionRecord* record = record_for(arg);
      if (!record->faithful) {
        continue;
      }
      target_event.arguments.push_back(Label{arg.label_id, arg.role, *record->matched_span,
                                             slice(target_text, *record->matched_span)});
    }
    events.push_back(std::move(target_event));
  }
  return events;
}

ProjectedDatapoint make_datapoint(const LabeledSentence& source, const std::string& target_lang,
                                  const std::string& target_text,
                                  std::vector<ProjectionRecord> records, Method method,
                                  const std::string& translator_id,
                                  const std::string& contextual_id,
                                  const std::string& config_hash) {
  ProjectedDatapoint dp;
  dp.source_ref = {source.doc_id, source.sent_id};
  dp.language = target_lang;
  dp.target_text = target_text;
  dp.events = assemble_target_events(source, target_text, records);
  dp.datapoint_faithful = std::all_of(records.begin(), records.end(),
                                      [](const ProjectionRecord& r) { return r.faithful; });
  dp.records = std::move(records);
  dp.provenance = {std::string(method_name(method)), translator_id, contextual_id, config_hash};
  return dp;
}

}  // namespace labelproj
