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
#include <string>
#include <string_view>
#include <vector>

namespace labelproj::uni {

// Strict UTF-8 decoding; overlong forms, surrogates and truncated
// sequences raise ParseError.
std::u32string to_utf32(std::string_view utf8);
std::string to_utf8(std::u32string_view cps);
std::string to_utf8(char32_t cp);

/// Length in Unicode code points.
std::size_t cp_length(std::string_view utf8);

/// Code-point slice [start, end). Raises ValidationError when
/// start > end or end exceeds the text length.
std::string cp_slice(std::string_view utf8, std::size_t start, std::size_t end);

struct Normalized {
  std::string text;  // NFC form
  // original code-point index -> normalized code-point index,
  // cp_length(original)+1 entries (the last maps end-of-text).
  std::vector<std::size_t> offset_map;
  bool changed = false;
};

/// NFC normalization with an offset map for re-anchoring code-point spans.
/// Offsets at normalization boundaries map exactly; an offset strictly
/// inside a composed/reordered run clamps into the run's normalized extent.
Normalized normalize_nfc_with_map(std::string_view utf8);

std::string normalize_nfc(std::string_view utf8);

bool is_whitespace(char32_t cp);

/// Simple (length-preserving, per-code-point) case folding.
char32_t fold_case(char32_t cp);
std::u32string fold_case(std::u32string_view cps);

/// Han, Hiragana, Katakana, Hangul or Bopomofo script.
bool is_cjk(char32_t cp);

std::string trim(std::string_view utf8);

}  // namespace labelproj::uni
