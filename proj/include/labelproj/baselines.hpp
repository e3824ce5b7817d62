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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "labelproj/backends.hpp"
#include "labelproj/clap.hpp"
#include "labelproj/corpus.hpp"

namespace labelproj {

/// Open/close marker templates with an {i} index placeholder,
/// e.g. "[{i}]" and "[/{i}]". Parsed from a single config string with the
/// two templates separated by a space.
struct MarkerScheme {
  std::string open_template = "[{i}]";
  std::string close_template = "[/{i}]";

  static MarkerScheme parse(std::string_view config_value);
  std::string open(int index) const;
  std::string close(int index) const;
};

/// One marked rendering of the sentence: labels of one non-overlapping
/// group wrapped in numbered markers. Labels sharing an identical span
/// share a marker pair.
struct MarkedVariant {
  std::string text;
  std::map<std::string, int> marker_map;  // label_id -> marker index
};

struct MarkedSentence {
  std::vector<MarkedVariant> variants;
  std::vector<std::vector<std::string>> groups;  // label_ids per variant
};

/// Wraps every label span in numbered markers, splitting overlapping
/// (non-identical) spans into greedily-formed non-overlapping groups —
/// one marked variant each. A sentence without labels yields one
/// unmodified variant.
MarkedSentence insert_markers(const LabeledSentence& sentence, const MarkerScheme& scheme);

struct ExtractedMarkers {
  std::string clean_text;  // all marker tokens removed
  // marker index -> enclosed text (whitespace-trimmed) and its span in clean_text
  std::map<int, std::pair<std::string, Span>> found;
};

/// Scans for marker tokens (tolerating single internal spaces, e.g.
/// "[ 0 ]"), strips them all, and reports every expected index whose
/// open/close pair is present, ordered and non-crossing. Missing,
/// unbalanced or crossing markers are absences, never errors.
ExtractedMarkers extract_markers(std::string_view translated, const std::set<int>& expected,
                                 const MarkerScheme& scheme);

/// Marker-based projection: mark, translate each variant, recover labels
/// from surviving markers. The first variant's cleaned translation is the
/// target sentence; labels from other variants are relocated into it.
ProjectedDatapoint project_marker(const LabeledSentence& sentence, Translator& translator,
                                  const MarkerScheme& scheme, const std::string& src_lang,
                                  const std::string& tgt_lang,
                                  const std::string& config_hash = "");

struct Token {
  std::string surface;
  Span span;

  bool operator==(const Token&) const = default;
};

/// Whitespace-run tokenization; every CJK-script code point is its own
/// token. Spans index the original text in code points.
std::vector<Token> tokenize(std::string_view text, std::string_view language = "");

struct AlignmentSet {
  std::vector<Token> src_tokens;
  std::vector<Token> tgt_tokens;
  std::set<std::pair<std::size_t, std::size_t>> links;
};

/// Word-alignment projection: tokens under each label map through the
/// links; the candidate is the min-to-max merge of the aligned target
/// tokens (intervening tokens included). Labels without links are
/// unfaithful; merged candidates are substrings of the target by
/// construction.
ProjectedDatapoint project_alignment(const LabeledSentence& sentence,
                                     const std::string& target_text,
                                     const AlignmentSet& alignment,
                                     const std::string& target_lang = "",
                                     const std::string& translator_id = "",
                                     const std::string& config_hash = "");

/// Greedy one-to-one lexical linking: a lexicon hit, casefold-equal
/// surfaces, or bigram F1 >= 0.8 links a source token to the leftmost
/// unused target token.
AlignmentSet lexical_align(const std::string& text, const std::string& target_text,
                           const PhraseTable& lexicon);

/// Parses one Pharaoh line ("i-j" pairs) against the two tokenized
/// sentences. Malformed pairs and out-of-range indices report the given
/// line number.
AlignmentSet parse_pharaoh_line(std::string_view line, std::size_t line_no,
                                const std::string& text, const std::string& target_text);

/// Single-pair Pharaoh file: parses the first line. Corpus-level files
/// (line order = corpus order) go through read_alignment_lines.
AlignmentSet load_alignments(const std::filesystem::path& path, const std::string& text,
                             const std::string& target_text);

std::vector<std::string> read_alignment_lines(const std::filesystem::path& path);

/// Translates sentence and each label independently; faithful only when
/// the label's own translation happens to appear in the translated
/// sentence.
ProjectedDatapoint project_independent(const LabeledSentence& sentence, Translator& translator,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const std::string& config_hash = "");

/// Exhaustive substring argmax of chr_sim against the label's independent
/// translation, over substrings of length <= min(|target|, 2*|ref|+5).
/// Ties prefer shorter, then leftmost. Returns nullopt when no substring
/// shares a character with the reference.
std::optional<std::pair<Span, std::string>> constrained_argmax(std::string_view target_text,
                                                               std::string_view reference);

/// Constrained projection: the candidate is forced to be a substring of
/// the translated sentence, chosen by constrained_argmax.
ProjectedDatapoint project_constrained(const LabeledSentence& sentence, Translator& translator,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const std::string& config_hash = "");

}  // namespace labelproj
