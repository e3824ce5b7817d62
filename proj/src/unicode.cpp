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

#include "labelproj/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include <algorithm>

#include "labelproj/errors.hpp"

namespace labelproj::uni {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(ec);
  if (U_FAILURE(ec) || n == nullptr) {
    throw Error("ICU NFC normalizer unavailable");
  }
  return *n;
}

icu::UnicodeString from_utf32(std::u32string_view cps) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(cps.data()),
                                       static_cast<int32_t>(cps.size()));
}

std::u32string unistr_to_utf32(const icu::UnicodeString& us) {
  std::u32string out(static_cast<std::size_t>(us.countChar32()), U'\0');
  UErrorCode ec = U_ZERO_ERROR;
  us.toUTF32(reinterpret_cast<UChar32*>(out.data()), static_cast<int32_t>(out.size()), ec);
  if (U_FAILURE(ec)) {
    throw Error("UTF-32 conversion failed");
  }
  return out;
}

std::u32string nfc_run(const icu::Normalizer2& n, std::u32string_view run) {
  UErrorCode ec = U_ZERO_ERROR;
  icu::UnicodeString res = n.normalize(from_utf32(run), ec);
  if (U_FAILURE(ec)) {
    throw Error("NFC normalization failed");
  }
  return unistr_to_utf32(res);
}

}  // namespace

std::u32string to_utf32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  const std::size_t n = utf8.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(utf8[i]);
    char32_t cp = 0;
    int len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1Fu;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0Fu;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07u;
      len = 4;
    } else {
      throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + static_cast<std::size_t>(len) > n) {
      throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(utf8[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) {
        throw ParseError("invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3Fu);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw ParseError("invalid UTF-8 scalar value at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string to_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string to_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    out += to_utf8(cp);
  }
  return out;
}

std::size_t cp_length(std::string_view utf8) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto b = static_cast<unsigned char>(utf8[i]);
    if ((b & 0xC0) != 0x80) {
      ++count;
    }
    ++i;
  }
  return count;
}

std::string cp_slice(std::string_view utf8, std::size_t start, std::size_t end) {
  if (start > end) {
    throw ValidationError("slice start " + std::to_string(start) + " past end " +
                          std::to_string(end));
  }
  const std::u32string cps = to_utf32(utf8);
  if (end > cps.size()) {
    throw ValidationError("slice end " + std::to_string(end) + " out of bounds for text of " +
                          std::to_string(cps.size()) + " code points");
  }
  return to_utf8(std::u32string_view(cps).substr(start, end - start));
}

Normalized normalize_nfc_with_map(std::string_view utf8) {
  const std::u32string cps = to_utf32(utf8);
  const icu::Normalizer2& n = nfc_instance();

  Normalized result;
  UErrorCode ec = U_ZERO_ERROR;
  if (n.isNormalized(from_utf32(cps), ec) && U_SUCCESS(ec)) {
    result.text.assign(utf8);
    result.offset_map.resize(cps.size() + 1);
    for (std::size_t i = 0; i <= cps.size(); ++i) {
      result.offset_map[i] = i;
    }
    result.changed = false;
    return result;
  }

  // Normalize run-by-run between composition boundaries so that boundary
  // offsets survive exactly.
  std::u32string out;
  result.offset_map.resize(cps.size() + 1);
  std::size_t b = 0;
  while (b < cps.size()) {
    std::size_t e = b + 1;
    while (e < cps.size() && !n.hasBoundaryBefore(static_cast<UChar32>(cps[e]))) {
      ++e;
    }
    const std::u32string norm = nfc_run(n, std::u32string_view(cps).substr(b, e - b));
    for (std::size_t i = b; i < e; ++i) {
      result.offset_map[i] = out.size() + std::min(i - b, norm.size());
    }
    out += norm;
    b = e;
  }
  result.offset_map[cps.size()] = out.size();
  result.text = to_utf8(out);
  result.changed = result.text != utf8;
  return result;
}

std::string normalize_nfc(std::string_view utf8) {
  const std::u32string cps = to_utf32(utf8);
  const icu::Normalizer2& n = nfc_instance();
  UErrorCode ec = U_ZERO_ERROR;
  const icu::UnicodeString us = from_utf32(cps);
  if (n.isNormalized(us, ec) && U_SUCCESS(ec)) {
    return std::string(utf8);
  }
  ec = U_ZERO_ERROR;
  icu::UnicodeString res = n.normalize(us, ec);
  if (U_FAILURE(ec)) {
    throw Error("NFC normalization failed");
  }
  return to_utf8(unistr_to_utf32(res));
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

char32_t fold_case(char32_t cp) {
  return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
}

std::u32string fold_case(std::u32string_view cps) {
  std::u32string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    out.push_back(fold_case(cp));
  }
  return out;
}

bool is_cjk(char32_t cp) {
  UErrorCode ec = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &ec);
  if (U_FAILURE(ec)) {
    return false;
  }
  switch (script) {
    case USCRIPT_HAN:
    case USCRIPT_HIRAGANA:
    case USCRIPT_KATAKANA:
    case USCRIPT_HANGUL:
    case USCRIPT_BOPOMOFO:
      return true;
    default:
      return false;
  }
}

std::string trim(std::string_view utf8) {
  const std::u32string cps = to_utf32(utf8);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_whitespace(cps[b])) {
    ++b;
  }
  while (e > b && is_whitespace(cps[e - 1])) {
    --e;
  }
  return to_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace labelproj::uni
