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

#include "labelproj/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "labelproj/errors.hpp"
#include "labelproj/projection.hpp"
#include "labelproj/unicode.hpp"

namespace labelproj {

namespace {

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

struct MarkerToken {
  bool is_close = false;
  int index = 0;
  std::size_t begin = 0;  // code-point offsets in the scanned text
  std::size_t end = 0;
};

/// Matches one marker template at position p, tolerating a single space
/// between adjacent components ("[ 0 ]", "[/ 0]"). Returns the index and
/// the position just past the token.
std::optional<std::pair<int, std::size_t>> match_marker(const std::u32string& cps, std::size_t p,
                                                        const std::u32string& prefix,
                                                        const std::u32string& suffix) {
  std::size_t q = p;
  auto accept = [&](char32_t ch, bool allow_space) {
    if (allow_space && q + 1 < cps.size() && cps[q] == U' ' && cps[q + 1] == ch) {
      ++q;
    }
    if (q < cps.size() && cps[q] == ch) {
      ++q;
      return true;
    }
    return false;
  };
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (!accept(prefix[k], k > 0)) {
      return std::nullopt;
    }
  }
  if (q + 1 < cps.size() && cps[q] == U' ' && is_ascii_digit(cps[q + 1])) {
    ++q;
  }
  std::size_t digits_begin = q;
  while (q < cps.size() && is_ascii_digit(cps[q]) && q - digits_begin < 9) {
    ++q;
  }
  if (q == digits_begin) {
    return std::nullopt;
  }
  int index = 0;
  for (std::size_t k = digits_begin; k < q; ++k) {
    index = index * 10 + static_cast<int>(cps[k] - U'0');
  }
  for (char32_t ch : suffix) {
    if (!accept(ch, true)) {
      return std::nullopt;
    }
  }
  return std::make_pair(index, q);
}

std::pair<std::u32string, std::u32string> split_template(const std::string& tpl) {
  const std::size_t pos = tpl.find("{i}");
  if (pos == std::string::npos) {
    throw ConfigError("marker template \"" + tpl + "\" has no {i} placeholder");
  }
  return {uni::to_utf32(tpl.substr(0, pos)), uni::to_utf32(tpl.substr(pos + 3))};
}

std::vector<std::size_t> token_indices_under(const std::vector<Token>& tokens, const Span& span) {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].span.overlaps(span)) {
      indices.push_back(i);
    }
  }
  return indices;
}

void check_tokens_match(const std::vector<Token>& expected, const std::vector<Token>& actual,
                        const char* side) {
  if (expected != actual) {
    throw ValidationError(std::string("alignment ") + side +
                          " tokens do not match the sentence tokenization");
  }
}

}  // namespace

MarkerScheme MarkerScheme::parse(std::string_view config_value) {
  const std::size_t space = config_value.find(' ');
  if (space == std::string_view::npos || config_value.find(' ', space + 1) != std::string::npos) {
    throw ConfigError("marker scheme must be two space-separated templates, got \"" +
                      std::string(config_value) + "\"");
  }
  MarkerScheme scheme;
  scheme.open_template = std::string(config_value.substr(0, space));
  scheme.close_template = std::string(config_value.substr(space + 1));
  split_template(scheme.open_template);
  split_template(scheme.close_template);
  return scheme;
}

std::string MarkerScheme::open(int index) const {
  std::string out = open_template;
  out.replace(out.find("{i}"), 3, std::to_string(index));
  return out;
}

std::string MarkerScheme::close(int index) const {
  std::string out = close_template;
  out.replace(out.find("{i}"), 3, std::to_string(index));
  return out;
}

MarkedSentence insert_markers(const LabeledSentence& sentence, const MarkerScheme& scheme) {
  const std::vector<const Label*> labels = labels_in_span_order(sentence);

  // Cluster identical spans (they share one marker pair), then assign
  // clusters greedily to the first variant they do not overlap.
  struct Cluster {
    Span span;
    std::vector<std::string> label_ids;
  };
  std::vector<Cluster> clusters;
  std::map<Span, std::size_t> cluster_by_span;
  for (const Label* label : labels) {
    auto it = cluster_by_span.find(label->span);
    if (it == cluster_by_span.end()) {
      cluster_by_span.emplace(label->span, clusters.size());
      clusters.push_back(Cluster{label->span, {label->label_id}});
    } else {
      clusters[it->second].label_ids.push_back(label->label_id);
    }
  }

  std::vector<std::vector<std::size_t>> variant_clusters;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    bool placed = false;
    for (auto& variant : variant_clusters) {
      const bool clashes = std::any_of(variant.begin(), variant.end(), [&](std::size_t other) {
        return clusters[other].span.overlaps(clusters[c].span);
      });
      if (!clashes) {
        variant.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed) {
      variant_clusters.push_back({c});
    }
  }
  if (variant_clusters.empty()) {
    variant_clusters.push_back({});  // label-free sentence: one unmodified variant
  }

  const std::u32string cps = uni::to_utf32(sentence.text);
  MarkedSentence marked;
  for (const auto& member_clusters : variant_clusters) {
    MarkedVariant variant;
    std::vector<std::string> group;
    // Clusters were appended in span order; spans within a variant are
    // non-overlapping, so this order is also text order.
    std::unordered_map<std::size_t, int> open_at;
    std::unordered_map<std::size_t, int> close_at;
    int next_index = 0;
    for (std::size_t c : member_clusters) {
      open_at[clusters[c].span.start] = next_index;
      close_at[clusters[c].span.end] = next_index;
      for (const std::string& label_id : clusters[c].label_ids) {
        variant.marker_map[label_id] = next_index;
        group.push_back(label_id);
      }
      ++next_index;
    }
    std::string text;
    for (std::size_t p = 0; p <= cps.size(); ++p) {
      if (auto it = close_at.find(p); it != close_at.end()) {
        text += scheme.close(it->second);
      }
      if (auto it = open_at.find(p); it != open_at.end()) {
        text += scheme.open(it->second);
      }
      if (p < cps.size()) {
        text += uni::to_utf8(cps[p]);
      }
    }
    variant.text = std::move(text);
    marked.variants.push_back(std::move(variant));
    marked.groups.push_back(std::move(group));
  }
  return marked;
}

ExtractedMarkers extract_markers(std::string_view translated, const std::set<int>& expected,
                                 const MarkerScheme& scheme) {
  const auto [open_prefix, open_suffix] = split_template(scheme.open_template);
  const auto [close_prefix, close_suffix] = split_template(scheme.close_template);
  const std::u32string cps = uni::to_utf32(translated);

  std::vector<MarkerToken> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    // Close templates usually extend the open prefix ("[/" vs "["), so
    // they are tried first.
    if (auto m = match_marker(cps, i, close_prefix, close_suffix)) {
      tokens.push_back(MarkerToken{true, m->first, i, m->second});
      i = m->second;
      continue;
    }
    if (auto m = match_marker(cps, i, open_prefix, open_suffix)) {
      tokens.push_back(MarkerToken{false, m->first, i, m->second});
      i = m->second;
      continue;
    }
    ++i;
  }

  // Strip every token; remember each token's position in the clean text.
  std::u32string clean;
  std::vector<std::size_t> clean_pos(tokens.size());
  std::size_t cursor = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    clean.append(cps, cursor, tokens[t].begin - cursor);
    clean_pos[t] = clean.size();
    cursor = tokens[t].end;
  }
  clean.append(cps, cursor, cps.size() - cursor);

  struct PairCandidate {
    int index;
    std::size_t open_tok;
    std::size_t close_tok;
  };
  std::vector<PairCandidate> pairs;
  for (int index : expected) {
    std::vector<std::size_t> opens;
    std::vector<std::size_t> closes;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (tokens[t].index != index) {
        continue;
      }
      (tokens[t].is_close ? closes : opens).push_back(t);
    }
    if (opens.size() != 1 || closes.size() != 1 || opens[0] >= closes[0]) {
      continue;  // missing, duplicated or out-of-order: index stays absent
    }
    pairs.push_back(PairCandidate{index, opens[0], closes[0]});
  }

  ExtractedMarkers result;
  result.clean_text = uni::to_utf8(clean);
  for (const PairCandidate& p : pairs) {
    const bool crossing = std::any_of(pairs.begin(), pairs.end(), [&](const PairCandidate& q) {
      return (p.open_tok < q.open_tok && q.open_tok < p.close_tok && p.close_tok < q.close_tok) ||
             (q.open_tok < p.open_tok && p.open_tok < q.close_tok && q.close_tok < p.close_tok);
    });
    if (crossing) {
      continue;
    }
    std::size_t begin = clean_pos[p.open_tok];
    std::size_t end = clean_pos[p.close_tok];
    while (begin < end && uni::is_whitespace(clean[begin])) {
      ++begin;
    }
    while (end > begin && uni::is_whitespace(clean[end - 1])) {
      --end;
    }
    if (begin == end) {
      continue;
    }
    result.found.emplace(
        p.index, std::make_pair(uni::to_utf8(std::u32string_view(clean).substr(begin, end - begin)),
                                Span{begin, end}));
  }
  return result;
}

ProjectedDatapoint project_marker(const LabeledSentence& sentence, Translator& translator,
                                  const MarkerScheme& scheme, const std::string& src_lang,
                                  const std::string& tgt_lang, const std::string& config_hash) {
  const MarkedSentence marked = insert_markers(sentence, scheme);

  std::vector<ExtractedMarkers> extracted;
  extracted.reserve(marked.variants.size());
  for (const MarkedVariant& variant : marked.variants) {
    std::string raw;
    try {
      raw = translator.translate(variant.text, src_lang, tgt_lang);
    } catch (const BackendError& e) {
      throw BackendError("sentence " + sentence.sent_id + ": " + e.what(), e.key_digest());
    }
    std::set<int> expected;
    for (const auto& [label_id, index] : variant.marker_map) {
      expected.insert(index);
    }
    extracted.push_back(extract_markers(raw, expected, scheme));
  }

  const uni::Normalized norm = uni::normalize_nfc_with_map(extracted[0].clean_text);
  const std::string& target_text = norm.text;

  std::unordered_map<std::string, std::size_t> variant_of;
  for (std::size_t k = 0; k < marked.variants.size(); ++k) {
    for (const auto& [label_id, index] : marked.variants[k].marker_map) {
      variant_of[label_id] = k;
    }
  }

  std::vector<ProjectionRecord> records;
  std::vector<Span> taken;
  for (const Label* label : labels_in_span_order(sentence)) {
    ProjectionRecord record;
    record.label_id = label->label_id;
    record.method = Method::marker;
    record.attempts = 1;

    const std::size_t k = variant_of.at(label->label_id);
    const int index = marked.variants[k].marker_map.at(label->label_id);
    const auto found = extracted[k].found.find(index);
    if (found == extracted[k].found.end()) {
      record.diagnostics.push_back("marker " + std::to_string(index) +
                                   " not recovered from the translation");
      records.push_back(std::move(record));
      continue;
    }
    const std::string candidate = uni::normalize_nfc(found->second.first);
    record.candidate = candidate;
    if (k == 0) {
      const Span raw_span = found->second.second;
      const Span span{norm.offset_map[raw_span.start], norm.offset_map[raw_span.end]};
      if (span.start < span.end && slice(target_text, span) == candidate) {
        record.matched_span = span;
        record.faithful = true;
      } else if (auto relocated = find_label_span(candidate, target_text, taken, {})) {
        record.matched_span = relocated;
        record.faithful = true;
        record.diagnostics.push_back("marker span re-anchored after normalization");
      } else {
        record.diagnostics.push_back("marker content lost under normalization");
      }
    } else {
      if (auto span = find_label_span(candidate, target_text, taken, {})) {
        record.matched_span = span;
        record.faithful = true;
      } else {
        record.diagnostics.push_back("candidate from overlap variant " + std::to_string(k) +
                                     " does not occur in the target sentence");
      }
    }
    if (record.faithful) {
      taken.push_back(*record.matched_span);
    }
    records.push_back(std::move(record));
  }

  return make_datapoint(sentence, tgt_lang, target_text, std::move(records), Method::marker,
                        translator.backend_id(), "", config_hash);
}

std::vector<Token> tokenize(std::string_view text, std::string_view) {
  const std::u32string cps = uni::to_utf32(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (uni::is_whitespace(cps[i])) {
      ++i;
      continue;
    }
    if (uni::is_cjk(cps[i])) {
      tokens.push_back(Token{uni::to_utf8(cps[i]), Span{i, i + 1}});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !uni::is_whitespace(cps[j]) && !uni::is_cjk(cps[j])) {
      ++j;
    }
    tokens.push_back(Token{uni::to_utf8(std::u32string_view(cps).substr(i, j - i)), Span{i, j}});
    i = j;
  }
  return tokens;
}

ProjectedDatapoint project_alignment(const LabeledSentence& sentence,
                                     const std::string& target_text,
                                     const AlignmentSet& alignment,
                                     const std::string& target_lang,
                                     const std::string& translator_id,
                                     const std::string& config_hash) {
  check_tokens_match(tokenize(sentence.text), alignment.src_tokens, "source");
  check_tokens_match(tokenize(target_text), alignment.tgt_tokens, "target");
  for (const auto& [src, tgt] : alignment.links) {
    if (src >= alignment.src_tokens.size() || tgt >= alignment.tgt_tokens.size()) {
      throw ValidationError("alignment link " + std::to_string(src) + "-" + std::to_string(tgt) +
                            " out of token bounds");
    }
  }

  std::vector<ProjectionRecord> records;
  for (const Label* label : labels_in_span_order(sentence)) {
    ProjectionRecord record;
    record.label_id = label->label_id;
    record.method = Method::align;
    record.attempts = 1;

    const std::vector<std::size_t> src_idx = token_indices_under(alignment.src_tokens, label->span);
    std::optional<std::size_t> min_tgt;
    std::optional<std::size_t> max_tgt;
    for (const auto& [src, tgt] : alignment.links) {
      if (std::find(src_idx.begin(), src_idx.end(), src) == src_idx.end()) {
        continue;
      }
      min_tgt = min_tgt ? std::min(*min_tgt, tgt) : tgt;
      max_tgt = max_tgt ? std::max(*max_tgt, tgt) : tgt;
    }
    if (!min_tgt) {
      record.diagnostics.push_back("no alignment links cover the label tokens");
      records.push_back(std::move(record));
      continue;
    }
    const Span span{alignment.tgt_tokens[*min_tgt].span.start,
                    alignment.tgt_tokens[*max_tgt].span.end};
    record.candidate = slice(target_text, span);
    record.matched_span = span;
    record.faithful = true;
    records.push_back(std::move(record));
  }

  return make_datapoint(sentence, target_lang, target_text, std::move(records), Method::align,
                        translator_id, "", config_hash);
}

AlignmentSet lexical_align(const std::string& text, const std::string& target_text,
                           const PhraseTable& lexicon) {
  AlignmentSet alignment;
  alignment.src_tokens = tokenize(text);
  alignment.tgt_tokens = tokenize(target_text);
  std::vector<bool> used(alignment.tgt_tokens.size(), false);
  for (std::size_t i = 0; i < alignment.src_tokens.size(); ++i) {
    const std::string& src_surface = alignment.src_tokens[i].surface;
    const auto lexicon_hit = lexicon.entries.find(src_surface);
    const std::u32string src_folded = uni::fold_case(uni::to_utf32(src_surface));
    for (std::size_t j = 0; j < alignment.tgt_tokens.size(); ++j) {
      if (used[j]) {
        continue;
      }
      const std::string& tgt_surface = alignment.tgt_tokens[j].surface;
      const bool linked =
          (lexicon_hit != lexicon.entries.end() && lexicon_hit->second == tgt_surface) ||
          src_folded == uni::fold_case(uni::to_utf32(tgt_surface)) ||
          ngram_f1(src_surface, tgt_surface, 2) >= 0.8;
      if (linked) {
        alignment.links.emplace(i, j);
        used[j] = true;
        break;
      }
    }
  }
  return alignment;
}

AlignmentSet parse_pharaoh_line(std::string_view line, std::size_t line_no,
                                const std::string& text, const std::string& target_text) {
  AlignmentSet alignment;
  alignment.src_tokens = tokenize(text);
  alignment.tgt_tokens = tokenize(target_text);

  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) {
      ++pos;
    }
    if (pos >= line.size()) {
      break;
    }
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') {
      ++end;
    }
    const std::string_view pair = line.substr(pos, end - pos);
    pos = end;

    const std::size_t dash = pair.find('-');
    const auto all_digits = [](std::string_view s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return c >= '0' && c <= '9';
      });
    };
    if (dash == std::string_view::npos || !all_digits(pair.substr(0, dash)) ||
        !all_digits(pair.substr(dash + 1))) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed alignment pair \"" +
                       std::string(pair) + "\"");
    }
    const std::size_t src = std::stoull(std::string(pair.substr(0, dash)));
    const std::size_t tgt = std::stoull(std::string(pair.substr(dash + 1)));
    if (src >= alignment.src_tokens.size() || tgt >= alignment.tgt_tokens.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": alignment pair \"" +
                            std::string(pair) + "\" out of token bounds (" +
                            std::to_string(alignment.src_tokens.size()) + " source, " +
                            std::to_string(alignment.tgt_tokens.size()) + " target tokens)");
    }
    alignment.links.emplace(src, tgt);
  }
  return alignment;
}

AlignmentSet load_alignments(const std::filesystem::path& path, const std::string& text,
                             const std::string& target_text) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open alignment file " + path.string());
  }
  std::string line;
  std::getline(in, line);  // an absent line behaves as an empty one
  return parse_pharaoh_line(line, 1, text, target_text);
}

std::vector<std::string> read_alignment_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open alignment file " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }
  return lines;
}

ProjectedDatapoint project_independent(const LabeledSentence& sentence, Translator& translator,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const std::string& config_hash) {
  std::string target_text;
  try {
    target_text = uni::normalize_nfc(translator.translate(sentence.text, src_lang, tgt_lang));
  } catch (const BackendError& e) {
    throw BackendError("sentence " + sentence.sent_id + ": " + e.what(), e.key_digest());
  }

  std::vector<ProjectionRecord> records;
  std::vector<Span> taken;
  for (const Label* label : labels_in_span_order(sentence)) {
    ProjectionRecord record;
    record.label_id = label->label_id;
    record.method = Method::independent;
    record.attempts = 1;
    std::string candidate;
    try {
      candidate = uni::normalize_nfc(translator.translate(label->surface, src_lang, tgt_lang));
    } catch (const BackendError& e) {
      throw BackendError("sentence " + sentence.sent_id + " label " + label->label_id + ": " +
                             e.what(),
                         e.key_digest());
    }
    if (!candidate.empty()) {
      record.candidate = candidate;
    }
    if (auto span = find_label_span(candidate, target_text, taken, {})) {
      record.matched_span = span;
      record.faithful = true;
      taken.push_back(*span);
    } else if (!candidate.empty()) {
      record.diagnostics.push_back("label translation \"" + candidate +
                                   "\" does not occur in the target sentence");
    } else {
      record.diagnostics.push_back("label translated to the empty string");
    }
    records.push_back(std::move(record));
  }

  return make_datapoint(sentence, tgt_lang, target_text, std::move(records), Method::independent,
                        translator.backend_id(), "", config_hash);
}

std::optional<std::pair<Span, std::string>> constrained_argmax(std::string_view target_text,
                                                               std::string_view reference) {
  const std::u32string hay = uni::to_utf32(target_text);
  const std::u32string ref = uni::to_utf32(reference);
  if (hay.empty() || ref.empty()) {
    return std::nullopt;
  }
  const std::size_t cap = std::min(hay.size(), 2 * ref.size() + 5);

  double best_score = 0.0;
  std::optional<Span> best;
  // Length-then-start iteration makes "first strictly better wins"
  // realize the (score desc, length asc, start asc) tie-break.
  for (std::size_t len = 1; len <= cap; ++len) {
    for (std::size_t start = 0; start + len <= hay.size(); ++start) {
      const double score = chr_sim(std::u32string_view(hay).substr(start, len),
                                   std::u32string_view(ref));
      if (score > best_score) {
        best_score = score;
        best = Span{start, start + len};
      }
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return std::make_pair(*best,
                        uni::to_utf8(std::u32string_view(hay).substr(best->start, best->length())));
}

ProjectedDatapoint project_constrained(const LabeledSentence& sentence, Translator& translator,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const std::string& config_hash) {
  std::string target_text;
  try {
    target_text = uni::normalize_nfc(translator.translate(sentence.text, src_lang, tgt_lang));
  } catch (const BackendError& e) {
    throw BackendError("sentence " + sentence.sent_id + ": " + e.what(), e.key_digest());
  }

  std::vector<ProjectionRecord> records;
  for (const Label* label : labels_in_span_order(sentence)) {
    ProjectionRecord record;
    record.label_id = label->label_id;
    record.method = Method::constrained;
    record.attempts = 1;
    std::string reference;
    try {
      reference = uni::normalize_nfc(translator.translate(label->surface, src_lang, tgt_lang));
    } catch (const BackendError& e) {
      throw BackendError("sentence " + sentence.sent_id + " label " + label->label_id + ": " +
                             e.what(),
                         e.key_digest());
    }
    if (auto pick = constrained_argmax(target_text, reference)) {
      record.candidate = pick->second;
      record.matched_span = pick->first;
      record.faithful = true;
    } else {
      record.diagnostics.push_back("no target substring shares characters with reference \"" +
                                   reference + "\"");
    }
    records.push_back(std::move(record));
  }

  return make_datapoint(sentence, tgt_lang, target_text, std::move(records), Method::constrained,
                        translator.backend_id(), "", config_hash);
}

}  // namespace labelproj
