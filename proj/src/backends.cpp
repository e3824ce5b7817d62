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

#include "labelproj/backends.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>
#include <vector>

#include "labelproj/digest.hpp"
#include "labelproj/errors.hpp"
#include "labelproj/unicode.hpp"

namespace labelproj {

PhraseTable PhraseTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open phrase table " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("phrase table " + path.string() + ": " + e.what());
  }
  PhraseTable table;
  if (!j.contains("entries") || !j["entries"].is_object()) {
    throw ParseError("phrase table " + path.string() + ": expected {\"entries\": {...}}");
  }
  for (const auto& [key, value] : j["entries"].items()) {
    if (key.empty()) {
      throw ValidationError("phrase table " + path.string() + ": empty key");
    }
    if (!value.is_string()) {
      throw ParseError("phrase table " + path.string() + ": entry \"" + key +
                       "\" must map to a string");
    }
    table.entries[uni::normalize_nfc(key)] = uni::normalize_nfc(value.get<std::string>());
  }
  table.pass_through = j.value("pass_through", true);
  return table;
}

PhraseTable PhraseTable::inverted() const {
  PhraseTable out;
  out.pass_through = pass_through;
  for (const auto& [key, value] : entries) {
    if (!value.empty()) {
      out.entries.emplace(value, key);  // first key wins on duplicate values
    }
  }
  return out;
}

std::string dict_translate(const PhraseTable& table, std::string_view text, std::string_view,
                           std::string_view) {
  const std::u32string cps = uni::to_utf32(text);

  std::vector<std::pair<std::u32string, const std::string*>> keys;
  keys.reserve(table.entries.size());
  for (const auto& [key, value] : table.entries) {
    if (key.empty()) {
      throw ValidationError("phrase table has an empty key");
    }
    keys.emplace_back(uni::to_utf32(key), &value);
  }
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

  std::string out;
  bool first = true;
  bool pending_space = false;
  std::size_t i = 0;
  auto emit = [&](std::string_view piece) {
    if (!first && pending_space) {
      out += ' ';
    }
    out += piece;
    first = false;
    pending_space = false;
  };

  while (i < cps.size()) {
    if (uni::is_whitespace(cps[i])) {
      pending_space = true;
      ++i;
      continue;
    }
    const std::u32string* matched = nullptr;
    const std::string* value = nullptr;
    for (const auto& [key, val] : keys) {
      if (key.size() <= cps.size() - i &&
          std::u32string_view(cps).substr(i, key.size()) == key) {
        matched = &key;
        value = val;
        break;
      }
    }
    if (matched != nullptr) {
      emit(*value);
      i += matched->size();
      continue;
    }
    std::size_t j = i;
    if (uni::is_cjk(cps[i])) {
      j = i + 1;
    } else {
      while (j < cps.size() && !uni::is_whitespace(cps[j]) && !uni::is_cjk(cps[j])) {
        ++j;
      }
    }
    const std::string token = uni::to_utf8(std::u32string_view(cps).substr(i, j - i));
    if (!table.pass_through) {
      throw BackendError("phrase table has no entry for token \"" + token + "\"");
    }
    emit(token);
    i = j;
  }
  return out;
}

DictTranslator::DictTranslator(std::string id, PhraseTable forward, std::string src_lang,
                               std::string tgt_lang, std::optional<PhraseTable> reverse)
    : id_(std::move(id)),
      forward_(std::move(forward)),
      reverse_(reverse ? std::move(*reverse) : forward_.inverted()),
      src_lang_(std::move(src_lang)),
      tgt_lang_(std::move(tgt_lang)) {}

std::string DictTranslator::translate(const std::string& text, const std::string& src_lang,
                                      const std::string& tgt_lang) {
  if (src_lang == src_lang_ && tgt_lang == tgt_lang_) {
    return dict_translate(forward_, text, src_lang, tgt_lang);
  }
  if (src_lang == tgt_lang_ && tgt_lang == src_lang_) {
    return dict_translate(reverse_, text, src_lang, tgt_lang);
  }
  throw BackendError("translator \"" + id_ + "\" does not cover direction " + src_lang + "->" +
                     tgt_lang);
}

DictContextual::DictContextual(std::string id, PhraseTable table, PromptHints hints)
    : id_(std::move(id)), table_(std::move(table)), hints_(std::move(hints)) {}

std::string DictContextual::complete(const std::string& prompt) {
  const std::size_t ctx_pos = prompt.rfind(hints_.context_prefix);
  if (ctx_pos == std::string::npos) {
    throw BackendError("dictionary contextual backend \"" + id_ +
                       "\": context marker not found in prompt");
  }
  const std::size_t close = prompt.rfind(hints_.label_close, ctx_pos);
  if (close == std::string::npos || close == 0) {
    throw BackendError("dictionary contextual backend \"" + id_ +
                       "\": label quotes not found in prompt");
  }
  const std::size_t open = prompt.rfind(hints_.label_open, close - 1);
  if (open == std::string::npos) {
    throw BackendError("dictionary contextual backend \"" + id_ +
                       "\": label quotes not found in prompt");
  }
  const std::size_t label_begin = open + hints_.label_open.size();
  const std::string label = prompt.substr(label_begin, close - label_begin);
  return dict_translate(table_, label, "", "");
}

std::string_view cache_mode_name(CacheMode mode) {
  switch (mode) {
    case CacheMode::record:
      return "record";
    case CacheMode::replay:
      return "replay";
    case CacheMode::passthrough:
      return "passthrough";
  }
  throw Error("unknown cache mode");
}

CacheMode cache_mode_from_name(std::string_view name) {
  if (name == "record") return CacheMode::record;
  if (name == "replay") return CacheMode::replay;
  if (name == "passthrough") return CacheMode::passthrough;
  throw ConfigError("unknown cache mode \"" + std::string(name) + "\"");
}

std::string cache_key(const std::string& backend_id, const std::string& operation,
                      const nlohmann::json& inputs) {
  const nlohmann::json wrapper = {
      {"backend", backend_id}, {"op", operation}, {"inputs", inputs}};
  return canonical_digest(wrapper);
}

ReplayCache::ReplayCache(std::filesystem::path path, CacheMode mode)
    : path_(std::move(path)), mode_(mode) {
  std::ifstream in(path_);
  if (!in) {
    return;  // cache file created lazily on first append
  }
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
      throw ParseError(path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("key") || !j["key"].is_string() || !j.contains("output") ||
        !j["output"].is_string()) {
      throw ParseError(path_.string() + ":" + std::to_string(line_no) +
                       ": cache entry needs string \"key\" and \"output\"");
    }
    const std::string key = j["key"].get<std::string>();
    if (values_.emplace(key, j["output"].get<std::string>()).second) {
      ++per_backend_op_[j.value("backend", "?") + " " + j.value("op", "?")];
    } else {
      values_[key] = j["output"].get<std::string>();  // last entry wins
    }
    ++stats_.loaded;
  }
}

std::string ReplayCache::fetch_or_call(const std::string& backend_id, const std::string& operation,
                                       const nlohmann::json& inputs,
                                       const std::function<std::string()>& call) {
  if (mode_ == CacheMode::passthrough) {
    return call();
  }
  const std::string key = cache_key(backend_id, operation, inputs);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(key);
    if (it != values_.end()) {
      ++stats_.hits;
      return it->second;
    }
    if (mode_ == CacheMode::replay) {
      throw CacheMissError("replay cache miss for backend \"" + backend_id + "\" op \"" +
                               operation + "\" key " + key,
                           key);
    }
    ++stats_.misses;
  }
  const std::string output = call();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = values_.emplace(key, output);
    if (inserted) {
      append_entry(key, backend_id, operation, inputs, output);
      ++stats_.appends;
      ++per_backend_op_[backend_id + " " + operation];
    }
    return it->second;  // a racing writer's value wins deterministically
  }
}

void ReplayCache::append_entry(const std::string& key, const std::string& backend_id,
                               const std::string& operation, const nlohmann::json& inputs,
                               const std::string& output) {
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) {
    throw IoError("cannot append to cache " + path_.string());
  }
  nlohmann::ordered_json entry;
  entry["key"] = key;
  entry["backend"] = backend_id;
  entry["op"] = operation;
  entry["inputs"] = canonicalize(inputs);
  entry["output"] = output;
  out << entry.dump() << '\n';
  if (!out) {
    throw IoError("cache append failed for " + path_.string());
  }
}

CacheStats ReplayCache::stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stats_;
}

std::size_t ReplayCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.size();
}

std::map<std::string, std::size_t> ReplayCache::entries_by_backend_op() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return per_backend_op_;
}

namespace {

RemoteOptions with_default_id(RemoteOptions options) {
  if (options.backend_id.empty()) {
    options.backend_id = "http:" + options.endpoint;
  }
  return options;
}

}  // namespace

std::string http_json_call(const RemoteOptions& options, ReplayCache* cache,
                           const std::string& operation, const std::string& path,
                           const nlohmann::json& body, const std::string& response_field,
                           const nlohmann::json& key_inputs) {
  const std::string key = cache_key(options.backend_id, operation, key_inputs);
  auto do_call = [&]() -> std::string {
    const int attempts = std::max(1, options.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      // One client per request: httplib clients are not safe for
      // concurrent use, and callers may be multi-threaded.
      httplib::Client client(options.endpoint);
      const auto timeout = std::chrono::milliseconds(options.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      if (!options.bearer_token.empty()) {
        client.set_bearer_token_auth(options.bearer_token);
      }
      auto res = client.Post(path, body.dump(), "application/json");
      const bool transport_failure =
          !res || res->status < 200 || res->status >= 300;
      if (transport_failure) {
        if (attempt < attempts) {
          const auto backoff = std::chrono::milliseconds(
              static_cast<long long>(options.backoff_ms) << (attempt - 1));
          std::this_thread::sleep_for(backoff);
          continue;
        }
        std::string reason = !res ? "error " + std::string(httplib::to_string(res.error()))
                                  : "status " + std::to_string(res->status);
        throw BackendError("transport error on " + path + " against " + options.endpoint + " (" +
                               reason + ", " + std::to_string(attempt) + " attempts), key " + key,
                           key);
      }
      nlohmann::json response;
      try {
        response = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        throw BackendError("protocol error on " + path + ": response is not JSON, key " + key,
                           key);
      }
      if (!response.contains(response_field) || !response[response_field].is_string()) {
        throw BackendError("protocol error on " + path + ": missing \"" + response_field +
                               "\" field, key " + key,
                           key);
      }
      return response[response_field].get<std::string>();
    }
    throw BackendError("unreachable retry state", key);
  };

  if (cache != nullptr) {
    return cache->fetch_or_call(options.backend_id, operation, key_inputs, do_call);
  }
  return do_call();
}

HttpTranslator::HttpTranslator(RemoteOptions options, std::shared_ptr<ReplayCache> cache)
    : options_(with_default_id(std::move(options))), cache_(std::move(cache)) {}

std::string HttpTranslator::backend_id() const { return options_.backend_id; }

std::string HttpTranslator::translate(const std::string& text, const std::string& src_lang,
                                      const std::string& tgt_lang) {
  const nlohmann::json body = {{"text", text}, {"source", src_lang}, {"target", tgt_lang}};
  return http_json_call(options_, cache_.get(), "translate", "/translate", body, "translation",
                        body);
}

HttpContextual::HttpContextual(RemoteOptions options, std::shared_ptr<ReplayCache> cache)
    : options_(with_default_id(std::move(options))), cache_(std::move(cache)) {}

std::string HttpContextual::backend_id() const { return options_.backend_id; }

std::string HttpContextual::complete(const std::string& prompt) {
  nlohmann::json body = {{"prompt", prompt}};
  if (options_.extra_params.is_object()) {
    for (const auto& [key, value] : options_.extra_params.items()) {
      body[key] = value;
    }
  }
  return http_json_call(options_, cache_.get(), "complete", "/complete", body, "completion", body);
}

}  // namespace labelproj
