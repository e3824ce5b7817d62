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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

namespace labelproj {

/// Sentence translation contract. Implementations must be safe to call
/// from multiple threads concurrently.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string backend_id() const = 0;
  virtual std::string translate(const std::string& text, const std::string& src_lang,
                                const std::string& tgt_lang) = 0;
};

/// Contextual translation contract: a rendered prompt in, the raw
/// completion text out.
class ContextualTranslator {
 public:
  virtual ~ContextualTranslator() = default;
  virtual std::string backend_id() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Deterministic phrase-to-phrase mapping, matched longest-first and
/// case-sensitively over code points. Used as the test realization of
/// both translation contracts.
struct PhraseTable {
  std::map<std::string, std::string> entries;
  bool pass_through = true;

  /// Reads {"entries": {...}, "pass_through": bool}.
  static PhraseTable load(const std::filesystem::path& path);
  /// Swaps keys and values; on duplicate values the first (in key order) wins.
  PhraseTable inverted() const;
};

/// Longest-match left-to-right phrase translation. Pieces that were
/// whitespace-separated in the input are joined with a single space;
/// adjacent pieces (CJK segmentation) concatenate. An unmatched token
/// with pass_through=false raises BackendError naming the token.
std::string dict_translate(const PhraseTable& table, std::string_view text, std::string_view src,
                           std::string_view tgt);

class DictTranslator : public Translator {
 public:
  DictTranslator(std::string id, PhraseTable forward, std::string src_lang, std::string tgt_lang,
                 std::optional<PhraseTable> reverse = std::nullopt);

  std::string backend_id() const override { return id_; }
  std::string translate(const std::string& text, const std::string& src_lang,
                        const std::string& tgt_lang) override;

 private:
  std::string id_;
  PhraseTable forward_;
  PhraseTable reverse_;
  std::string src_lang_;
  std::string tgt_lang_;
};

/// How the dictionary contextual backend recovers the query label and
/// context from a rendered prompt. Defaults follow the default
/// instruction template (label in straight single quotes, context after
/// "Sentence: ").
struct PromptHints {
  std::string label_open = "'";
  std::string label_close = "'";
  std::string context_prefix = "Sentence: ";
  std::string context_suffix = ". Answer";
};

class DictContextual : public ContextualTranslator {
 public:
  DictContextual(std::string id, PhraseTable table, PromptHints hints = {});

  std::string backend_id() const override { return id_; }
  std::string complete(const std::string& prompt) override;

 private:
  std::string id_;
  PhraseTable table_;
  PromptHints hints_;
};

enum class CacheMode { record, replay, passthrough };

std::string_view cache_mode_name(CacheMode mode);
CacheMode cache_mode_from_name(std::string_view name);

/// Stable digest of (backend_id, operation, canonicalized inputs).
/// Inputs are canonicalized by NFC-normalizing strings and sorting
/// object fields, so logically equal requests share a key.
std::string cache_key(const std::string& backend_id, const std::string& operation,
                      const nlohmann::json& inputs);

struct CacheStats {
  std::size_t loaded = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t appends = 0;
};

/// Append-only JSONL record/replay store for backend exchanges.
/// Concurrent lookups are fine; appends are serialized and atomic at
/// line granularity. Last entry wins on duplicate keys.
class ReplayCache {
 public:
  ReplayCache(std::filesystem::path path, CacheMode mode);

  /// record: return the cached value on a hit, otherwise call, store,
  /// and return. replay: cached value or CacheMissError. passthrough:
  /// always call, never touch the store.
  std::string fetch_or_call(const std::string& backend_id, const std::string& operation,
                            const nlohmann::json& inputs,
                            const std::function<std::string()>& call);

  CacheMode mode() const { return mode_; }
  CacheStats stats() const;
  std::size_t size() const;
  /// (backend, op) -> entry count, for cache-stats reporting.
  std::map<std::string, std::size_t> entries_by_backend_op() const;

 private:
  void append_entry(const std::string& key, const std::string& backend_id,
                    const std::string& operation, const nlohmann::json& inputs,
                    const std::string& output);

  std::filesystem::path path_;
  CacheMode mode_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> values_;
  std::map<std::string, std::size_t> per_backend_op_;
  CacheStats stats_;
};

struct RemoteOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8089
  std::string backend_id;
  int timeout_ms = 30000;
  int max_attempts = 3;   // transport errors only
  int backoff_ms = 250;   // doubled per retry
  std::string bearer_token;
  nlohmann::json extra_params;  // merged into /complete bodies and cache keys
};

/// POST /translate {"text","source","target"} -> {"translation"}.
class HttpTranslator : public Translator {
 public:
  HttpTranslator(RemoteOptions options, std::shared_ptr<ReplayCache> cache = nullptr);

  std::string backend_id() const override;
  std::string translate(const std::string& text, const std::string& src_lang,
                        const std::string& tgt_lang) override;

 private:
  RemoteOptions options_;
  std::shared_ptr<ReplayCache> cache_;
};

/// POST /complete {"prompt", ...extra_params} -> {"completion"}.
class HttpContextual : public ContextualTranslator {
 public:
  HttpContextual(RemoteOptions options, std::shared_ptr<ReplayCache> cache = nullptr);

  std::string backend_id() const override;
  std::string complete(const std::string& prompt) override;

 private:
  RemoteOptions options_;
  std::shared_ptr<ReplayCache> cache_;
};

/// Shared request path for the HTTP backends: retry/backoff on transport
/// errors, strict single-shot on protocol errors, optional record/replay.
std::string http_json_call(const RemoteOptions& options, ReplayCache* cache,
                           const std::string& operation, const std::string& path,
                           const nlohmann::json& body, const std::string& response_field,
                           const nlohmann::json& key_inputs);

}  // namespace labelproj
