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

#include "labelproj/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "labelproj/errors.hpp"
#include "labelproj/unicode.hpp"

namespace labelproj {

namespace {

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ParseError(std::string("missing or non-string field \"") + key + "\"");
  }
  return j[key].get<std::string>();
}

Span span_from_json(const nlohmann::json& j, const std::string& label_id) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    throw ParseError("label " + label_id + ": span must be a two-element array of indices");
  }
  return Span{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

Label label_from_json(const nlohmann::json& j, std::string role) {
  Label label;
  label.label_id = require_string(j, "label_id");
  if (role.empty()) {
    label.role = require_string(j, "role");
  } else {
    label.role = std::move(role);
  }
  if (!j.contains("span")) {
    throw ParseError("label " + label.label_id + ": missing span");
  }
  label.span = span_from_json(j["span"], label.label_id);
  label.surface = require_string(j, "surface");
  return label;
}

nlohmann::ordered_json label_to_json(const Label& label, bool with_role) {
  nlohmann::ordered_json j;
  j["label_id"] = label.label_id;
  if (with_role) {
    j["role"] = label.role;
  }
  j["span"] = {label.span.start, label.span.end};
  j["surface"] = label.surface;
  return j;
}

void normalize_label(Label& label, const std::vector<std::size_t>& offset_map) {
  if (label.span.start >= offset_map.size() || label.span.end >= offset_map.size()) {
    throw ValidationError("label " + label.label_id + ": span [" +
                          std::to_string(label.span.start) + ", " +
                          std::to_string(label.span.end) + ") out of bounds");
  }
  label.span.start = offset_map[label.span.start];
  label.span.end = offset_map[label.span.end];
  label.surface = uni::normalize_nfc(label.surface);
}

/// NFC-normalizes the sentence in place, re-anchoring spans when the
/// text changed under normalization.
void normalize_sentence(LabeledSentence& sentence) {
  uni::Normalized norm = uni::normalize_nfc_with_map(sentence.text);
  if (!norm.changed) {
    for (EventFrame& event : sentence.events) {
      event.trigger.surface = uni::normalize_nfc(event.trigger.surface);
      for (Label& arg : event.arguments) {
        arg.surface = uni::normalize_nfc(arg.surface);
      }
    }
    return;
  }
  sentence.text = std::move(norm.text);
  for (EventFrame& event : sentence.events) {
    normalize_label(event.trigger, norm.offset_map);
    for (Label& arg : event.arguments) {
      normalize_label(arg, norm.offset_map);
    }
  }
}

void validate_label(const Label& label, const std::string& text, std::size_t text_length) {
  if (label.span.start >= label.span.end) {
    throw ValidationError("label " + label.label_id + ": span [" +
                          std::to_string(label.span.start) + ", " +
                          std::to_string(label.span.end) + ") is empty or inverted");
  }
  if (label.span.end > text_length) {
    throw ValidationError("label " + label.label_id + ": span end " +
                          std::to_string(label.span.end) + " out of bounds for text of " +
                          std::to_string(text_length) + " code points");
  }
  const std::string sliced = slice(text, label.span);
  if (sliced != label.surface) {
    throw ValidationError("label " + label.label_id + ": surface mismatch (surface \"" +
                          label.surface + "\" vs text slice \"" + sliced + "\")");
  }
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::clap:
      return "clap";
    case Method::marker:
      return "marker";
    case Method::align:
      return "align";
    case Method::independent:
      return "independent";
    case Method::constrained:
      return "constrained";
  }
  throw Error("unknown method enum value");
}

Method method_from_name(std::string_view name) {
  if (name == "clap") return Method::clap;
  if (name == "marker") return Method::marker;
  if (name == "align") return Method::align;
  if (name == "independent") return Method::independent;
  if (name == "constrained") return Method::constrained;
  throw ParseError("unknown method \"" + std::string(name) + "\"");
}

std::string slice(std::string_view text, const Span& span) {
  return uni::cp_slice(text, span.start, span.end);
}

RoleRegistry RoleRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open role registry " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("role registry " + path.string() + ": " + e.what());
  }
  if (!j.contains("roles") || !j["roles"].is_array()) {
    throw ParseError("role registry " + path.string() + ": expected {\"roles\": [...]}");
  }
  RoleRegistry registry;
  for (const auto& r : j["roles"]) {
    if (!r.is_string()) {
      throw ParseError("role registry " + path.string() + ": roles must be strings");
    }
    registry.roles.insert(r.get<std::string>());
  }
  if (registry.roles.empty()) {
    throw ValidationError("role registry " + path.string() + " is empty");
  }
  return registry;
}

void validate_sentence(const LabeledSentence& sentence, const RoleRegistry& registry) {
  const std::size_t text_length = uni::cp_length(sentence.text);
  std::unordered_set<std::string> seen_ids;
  for (const EventFrame& event : sentence.events) {
    if (event.trigger.role != kTriggerRole) {
      throw ValidationError("label " + event.trigger.label_id + ": trigger role must be \"" +
                            std::string(kTriggerRole) + "\"");
    }
    validate_label(event.trigger, sentence.text, text_length);
    if (!seen_ids.insert(event.trigger.label_id).second) {
      throw ValidationError("label " + event.trigger.label_id + ": duplicate label_id");
    }
    for (const Label& arg : event.arguments) {
      if (!registry.contains(arg.role)) {
        throw ValidationError("label " + arg.label_id + ": unknown role \"" + arg.role + "\"");
      }
      validate_label(arg, sentence.text, text_length);
      if (!seen_ids.insert(arg.label_id).second) {
        throw ValidationError("label " + arg.label_id + ": duplicate label_id");
      }
    }
  }
}

LabeledSentence sentence_from_json(const nlohmann::json& j) {
  LabeledSentence sentence;
  sentence.doc_id = require_string(j, "doc_id");
  sentence.sent_id = require_string(j, "sent_id");
  sentence.language = require_string(j, "language");
  sentence.text = require_string(j, "text");
  if (j.contains("events")) {
    if (!j["events"].is_array()) {
      throw ParseError("\"events\" must be an array");
    }
    for (const auto& ev : j["events"]) {
      EventFrame event;
      event.event_type = require_string(ev, "event_type");
      if (!ev.contains("trigger")) {
        throw ParseError("event " + event.event_type + ": missing trigger");
      }
      event.trigger = label_from_json(ev["trigger"], std::string(kTriggerRole));
      if (ev.contains("arguments")) {
        for (const auto& arg : ev["arguments"]) {
          event.arguments.push_back(label_from_json(arg, ""));
        }
      }
      sentence.events.push_back(std::move(event));
    }
  }
  return sentence;
}

nlohmann::ordered_json sentence_to_json(const LabeledSentence& sentence) {
  nlohmann::ordered_json j;
  j["doc_id"] = sentence.doc_id;
  j["sent_id"] = sentence.sent_id;
  j["language"] = sentence.language;
  j["text"] = sentence.text;
  j["events"] = nlohmann::ordered_json::array();
  for (const EventFrame& event : sentence.events) {
    nlohmann::ordered_json ev;
    ev["event_type"] = event.event_type;
    ev["trigger"] = label_to_json(event.trigger, /*with_role=*/false);
    ev["arguments"] = nlohmann::ordered_json::array();
    for (const Label& arg : event.arguments) {
      ev["arguments"].push_back(label_to_json(arg, /*with_role=*/true));
    }
    j["events"].push_back(std::move(ev));
  }
  return j;
}

Corpus load_corpus(const std::filesystem::path& path, const RoleRegistry& registry) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open corpus " + path.string());
  }
  Corpus corpus;
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
    LabeledSentence sentence;
    try {
      sentence = sentence_from_json(j);
      normalize_sentence(sentence);
      validate_sentence(sentence, registry);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (corpus.sentences.empty()) {
      corpus.language = sentence.language;
    } else if (sentence.language != corpus.language) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": language \"" +
                            sentence.language + "\" differs from corpus language \"" +
                            corpus.language + "\"");
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write corpus " + path.string());
  }
  for (const LabeledSentence& sentence : corpus.sentences) {
    out << sentence_to_json(sentence).dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

nlohmann::ordered_json datapoint_to_json(const ProjectedDatapoint& dp) {
  nlohmann::ordered_json j;
  j["doc_id"] = dp.source_ref.doc_id;
  j["sent_id"] = dp.source_ref.sent_id;
  j["language"] = dp.language;
  j["text"] = dp.target_text;
  LabeledSentence as_sentence{dp.source_ref.doc_id, dp.source_ref.sent_id, dp.language,
                              dp.target_text, dp.events};
  j["events"] = sentence_to_json(as_sentence)["events"];
  j["records"] = nlohmann::ordered_json::array();
  for (const ProjectionRecord& record : dp.records) {
    nlohmann::ordered_json r;
    r["label_id"] = record.label_id;
    r["method"] = std::string(method_name(record.method));
    if (record.candidate) {
      r["candidate"] = *record.candidate;
    }
    if (record.matched_span) {
      r["matched_span"] = {record.matched_span->start, record.matched_span->end};
    }
    r["faithful"] = record.faithful;
    r["attempts"] = record.attempts;
    r["diagnostics"] = record.diagnostics;
    j["records"].push_back(std::move(r));
  }
  j["datapoint_faithful"] = dp.datapoint_faithful;
  j["provenance"] = {{"method", dp.provenance.method},
                     {"translator_id", dp.provenance.translator_id},
                     {"contextual_model_id", dp.provenance.contextual_model_id},
                     {"config_hash", dp.provenance.config_hash}};
  return j;
}

ProjectedDatapoint datapoint_from_json(const nlohmann::json& j) {
  ProjectedDatapoint dp;
  LabeledSentence sentence = sentence_from_json(j);
  dp.source_ref = {sentence.doc_id, sentence.sent_id};
  dp.language = sentence.language;
  dp.target_text = sentence.text;
  dp.events = std::move(sentence.events);
  if (!j.contains("records") || !j["records"].is_array()) {
    throw ParseError("projected datapoint missing \"records\" array");
  }
  for (const auto& r : j["records"]) {
    ProjectionRecord record;
    record.label_id = require_string(r, "label_id");
    record.method = method_from_name(require_string(r, "method"));
    if (r.contains("candidate") && !r["candidate"].is_null()) {
      record.candidate = r["candidate"].get<std::string>();
    }
    if (r.contains("matched_span") && !r["matched_span"].is_null()) {
      record.matched_span = span_from_json(r["matched_span"], record.label_id);
    }
    if (!r.contains("faithful") || !r["faithful"].is_boolean()) {
      throw ParseError("record " + record.label_id + ": missing \"faithful\"");
    }
    record.faithful = r["faithful"].get<bool>();
    record.attempts = r.value("attempts", 0);
    if (r.contains("diagnostics")) {
      record.diagnostics = r["diagnostics"].get<std::vector<std::string>>();
    }
    if (record.faithful != record.matched_span.has_value()) {
      throw ValidationError("record " + record.label_id +
                            ": faithful flag inconsistent with matched_span");
    }
    dp.records.push_back(std::move(record));
  }
  if (!j.contains("datapoint_faithful") || !j["datapoint_faithful"].is_boolean()) {
    throw ParseError("projected datapoint missing \"datapoint_faithful\"");
  }
  dp.datapoint_faithful = j["datapoint_faithful"].get<bool>();
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    dp.provenance.method = p.value("method", "");
    dp.provenance.translator_id = p.value("translator_id", "");
    dp.provenance.contextual_model_id = p.value("contextual_model_id", "");
    dp.provenance.config_hash = p.value("config_hash", "");
  }
  return dp;
}

std::vector<ProjectedDatapoint> load_projected(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open projected file " + path.string());
  }
  std::vector<ProjectedDatapoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(datapoint_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_projected(const std::vector<ProjectedDatapoint>& datapoints,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write projected file " + path.string());
  }
  for (const ProjectedDatapoint& dp : datapoints) {
    out << datapoint_to_json(dp).dump() << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::vector<const Label*> labels_in_span_order(const LabeledSentence& sentence) {
  std::vector<const Label*> labels;
  for (const EventFrame& event : sentence.events) {
    labels.push_back(&event.trigger);
    for (const Label& arg : event.arguments) {
      labels.push_back(&arg);
    }
  }
  std::sort(labels.begin(), labels.end(), [](const Label* a, const Label* b) {
    return std::tie(a->span.start, a->span.end, a->label_id) <
           std::tie(b->span.start, b->span.end, b->label_id);
  });
  return labels;
}

}  // namespace labelproj
