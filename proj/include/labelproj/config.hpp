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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "labelproj/clap.hpp"

namespace labelproj {

struct BackendConfig {
  std::string kind;  // "dict" | "http"
  std::string id;
  // dict
  std::string table;
  std::string reverse_table;
  // http
  std::string endpoint;
  int timeout_ms = 30000;
  int max_attempts = 3;
  int backoff_ms = 250;
  nlohmann::json params = nlohmann::json::object();

  bool present() const { return !kind.empty(); }
};

struct RunConfig {
  std::string source_lang;
  std::string target_lang;
  std::string method;
  std::string corpus_path;
  std::string out_path;
  std::string roles_path;
  std::uint64_t seed = 0;
  int max_concurrency = 1;

  BackendConfig translator;
  BackendConfig contextual;

  std::string cache_path;
  std::string cache_mode = "record";

  ClapConfig clap;
  std::string examples_path;  // in-context examples for method=clap

  std::string marker_scheme = "[{i}] [/{i}]";

  std::string alignment_path;     // Pharaoh file, line order = corpus order
  std::string alignment_lexicon;  // phrase table for lexical linking
};

/// Reads a config file; a run manifest (an object with "config" and
/// "config_hash") is accepted and unwrapped, so manifests re-run as-is.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& config);

struct ConfigOverrides {
  std::optional<std::string> method;
  std::optional<std::string> corpus;
  std::optional<std::string> out;
  std::optional<std::string> cache;
  std::optional<std::string> cache_mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> concurrency;
};

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

/// Checks the per-method requirements (clap needs a contextual backend
/// and, when n > 0, an examples file; align needs an alignment source;
/// every method needs a translator). Raises ConfigError.
void validate_config(const RunConfig& config, bool for_project);

/// Digest of the semantic configuration. File locations (corpus, out,
/// roles, cache) are excluded; content-bearing inputs (phrase tables,
/// lexicon, alignment file, in-context examples) contribute the digest
/// of their bytes instead of their path, so the hash is stable across
/// relocations but sensitive to everything that shapes the output.
std::string config_hash(const RunConfig& config);

std::string digest_file(const std::filesystem::path& path);

}  // namespace labelproj
