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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace labelproj {

/// Half-open [start, end) range in Unicode code points.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
  std::size_t length() const { return end - start; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }
};

/// Reserved role name carried by every event trigger.
inline constexpr std::string_view kTriggerRole = "trigger";

struct Label {
  std::string label_id;
  std::string role;
  Span span;
  std::string surface;

  bool operator==(const Label&) const = default;
};

struct EventFrame {
  std::string event_type;
  Label trigger;
  std::vector<Label> arguments;

  bool operator==(const EventFrame&) const = default;
};

struct LabeledSentence {
  std::string doc_id;
  std::string sent_id;
  std::string language;  // BCP-47 tag
  std::string text;      // NFC-normalized at ingestion
  std::vector<EventFrame> events;

  bool operator==(const LabeledSentence&) const = default;
};

struct RoleRegistry {
  std::set<std::string> roles;

  bool contains(std::string_view role) const { return roles.count(std::string(role)) > 0; }
  /// Reads {"roles": [...]} JSON. The set must be non-empty.
  static RoleRegistry load(const std::filesystem::path& path);
};

struct Corpus {
  std::string language;
  std::vector<LabeledSentence> sentences;

  bool operator==(const Corpus&) const = default;
};

enum class Method { clap, marker, align, independent, constrained };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct ProjectionRecord {
  std::string label_id;
  Method method = Method::clap;
  std::optional<std::string> candidate;
  std::optional<Span> matched_span;
  bool faithful = false;
  int attempts = 0;
  std::vector<std::string> diagnostics;

  bool operator==(const ProjectionRecord&) const = default;
};

struct SourceRef {
  std::string doc_id;
  std::string sent_id;

  auto operator<=>(const SourceRef&) const = default;
};

struct Provenance {
  std::string method;
  std::string translator_id;
  std::string contextual_model_id;
  std::string config_hash;

  bool operator==(const Provenance&) const = default;
};

struct ProjectedDatapoint {
  SourceRef source_ref;
  std::string language;  // target-language tag
  std::string target_text;
  std::vector<EventFrame> events;  // only faithful labels, re-anchored to target_text
  std::vector<ProjectionRecord> records;
  bool datapoint_faithful = true;
  Provenance provenance;

  bool operator==(const ProjectedDatapoint&) const = default;
};

/// Code-point slice of text at span. Bounds violations raise ValidationError.
std::string slice(std::string_view text, const Span& span);

/// Checks every invariant of one sentence: span bounds, surface/slice
/// equality, roles against the registry, unique label ids.
void validate_sentence(const LabeledSentence& sentence, const RoleRegistry& registry);

/// Reads a JSONL corpus: NFC-normalizes every sentence (re-mapping spans
/// through the normalization offset map when the text changed) and
/// validates all invariants. Parse errors carry the 1-based line number.
Corpus load_corpus(const std::filesystem::path& path, const RoleRegistry& registry);

/// Writes one JSON object per sentence. load_corpus(save_corpus(c)) == c.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

nlohmann::ordered_json sentence_to_json(const LabeledSentence& sentence);
LabeledSentence sentence_from_json(const nlohmann::json& j);

nlohmann::ordered_json datapoint_to_json(const ProjectedDatapoint& dp);
ProjectedDatapoint datapoint_from_json(const nlohmann::json& j);

std::vector<ProjectedDatapoint> load_projected(const std::filesystem::path& path);
void save_projected(const std::vector<ProjectedDatapoint>& datapoints,
                    const std::filesystem::path& path);

/// All labels of a sentence (trigger first within each event), in
/// (span.start, span.end, label_id) order — the processing order every
/// projection method uses.
std::vector<const Label*> labels_in_span_order(const LabeledSentence& sentence);

}  // namespace labelproj
