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

#include "labelproj/config.hpp"

#include <fstream>
#include <sstream>

#include "labelproj/backends.hpp"
#include "labelproj/baselines.hpp"
#include "labelproj/digest.hpp"
#include "labelproj/errors.hpp"

namespace labelproj {

namespace {

BackendConfig backend_from_json(const nlohmann::json& j, const char* which) {
  BackendConfig backend;
  if (!j.is_object()) {
    throw ConfigError(std::string(which) + " backend config must be an object");
  }
  backend.kind = j.value("kind", "");
  if (backend.kind != "dict" && backend.kind != "http") {
    throw ConfigError(std::string(which) + " backend kind must be \"dict\" or \"http\", got \"" +
                      backend.kind + "\"");
  }
  backend.id = j.value("id", "");
  backend.table = j.value("table", "");
  backend.reverse_table = j.value("reverse_table", "");
  backend.endpoint = j.value("endpoint", "");
  backend.timeout_ms = j.value("timeout_ms", 30000);
  backend.max_attempts = j.value("max_attempts", 3);
  backend.backoff_ms = j.value("backoff_ms", 250);
  if (j.contains("params")) {
    backend.params = j["params"];
  }
  if (backend.kind == "dict" && backend.table.empty()) {
    throw ConfigError(std::string(which) + " dict backend needs a \"table\" path");
  }
  if (backend.kind == "http" && backend.endpoint.empty()) {
    throw ConfigError(std::string(which) + " http backend needs an \"endpoint\"");
  }
  return backend;
}

nlohmann::ordered_json backend_to_json(const BackendConfig& backend) {
  nlohmann::ordered_json j;
  j["kind"] = backend.kind;
  if (!backend.id.empty()) j["id"] = backend.id;
  if (!backend.table.empty()) j["table"] = backend.table;
  if (!backend.reverse_table.empty()) j["reverse_table"] = backend.reverse_table;
  if (!backend.endpoint.empty()) j["endpoint"] = backend.endpoint;
  if (backend.kind == "http") {
    j["timeout_ms"] = backend.timeout_ms;
    j["max_attempts"] = backend.max_attempts;
    j["backoff_ms"] = backend.backoff_ms;
    if (!backend.params.empty()) j["params"] = backend.params;
  }
  return j;
}

nlohmann::json backend_semantic_json(const BackendConfig& backend) {
  nlohmann::json j;
  if (!backend.present()) {
    return j;
  }
  j["kind"] = backend.kind;
  j["id"] = backend.id;
  if (!backend.table.empty()) j["table_digest"] = digest_file(backend.table);
  if (!backend.reverse_table.empty()) j["reverse_table_digest"] = digest_file(backend.reverse_table);
  if (!backend.endpoint.empty()) j["endpoint"] = backend.endpoint;
  if (backend.kind == "http") {
    j["params"] = backend.params;
  }
  return j;
}

}  // namespace

std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig config;
  config.source_lang = j.value("source_lang", "");
  config.target_lang = j.value("target_lang", "");
  config.method = j.value("method", "");
  config.corpus_path = j.value("corpus", "");
  config.out_path = j.value("out", "");
  config.roles_path = j.value("roles", "");
  config.seed = j.value("seed", std::uint64_t{0});
  config.max_concurrency = j.value("max_concurrency", 1);

  if (j.contains("translator")) {
    config.translator = backend_from_json(j["translator"], "translator");
  }
  if (j.contains("contextual")) {
    config.contextual = backend_from_json(j["contextual"], "contextual");
  }
  if (j.contains("cache")) {
    if (!j["cache"].is_object() || !j["cache"].contains("path")) {
      throw ConfigError("cache config needs {\"path\": ..., \"mode\": ...}");
    }
    config.cache_path = j["cache"]["path"].get<std::string>();
    config.cache_mode = j["cache"].value("mode", "record");
    cache_mode_from_name(config.cache_mode);  // validates
  }
  if (j.contains("clap")) {
    const auto& c = j["clap"];
    config.clap.num_incontext_examples = c.value("num_incontext_examples", 2);
    config.clap.max_attempts = c.value("max_attempts", 1);
    config.clap.backtranslation_threshold = c.value("backtranslation_threshold", 0.5);
    config.clap.example_seed = c.value("example_seed", std::uint64_t{0});
    config.clap.matching.casefold = c.value("casefold", false);
    config.clap.instruction_template =
        c.value("instruction_template", std::string(kDefaultInstructionTemplate));
    config.examples_path = c.value("examples_path", "");
    if (config.clap.num_incontext_examples < 0) {
      throw ConfigError("num_incontext_examples must be >= 0");
    }
    if (config.clap.backtranslation_threshold < 0.0 ||
        config.clap.backtranslation_threshold > 1.0) {
      throw ConfigError("backtranslation_threshold must be in [0, 1]");
    }
  }
  config.marker_scheme = j.value("marker_scheme", "[{i}] [/{i}]");
  if (j.contains("alignment")) {
    config.alignment_path = j["alignment"].value("path", "");
    config.alignment_lexicon = j["alignment"].value("lexicon", "");
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (j.contains("config") && j.contains("config_hash")) {
    j = j["config"];  // a manifest: re-run its embedded config
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["source_lang"] = config.source_lang;
  j["target_lang"] = config.target_lang;
  j["method"] = config.method;
  if (!config.corpus_path.empty()) j["corpus"] = config.corpus_path;
  if (!config.out_path.empty()) j["out"] = config.out_path;
  if (!config.roles_path.empty()) j["roles"] = config.roles_path;
  j["seed"] = config.seed;
  j["max_concurrency"] = config.max_concurrency;
  if (config.translator.present()) j["translator"] = backend_to_json(config.translator);
  if (config.contextual.present()) j["contextual"] = backend_to_json(config.contextual);
  if (!config.cache_path.empty()) {
    j["cache"] = {{"path", config.cache_path}, {"mode", config.cache_mode}};
  }
  nlohmann::ordered_json clap;
  clap["num_incontext_examples"] = config.clap.num_incontext_examples;
  clap["max_attempts"] = config.clap.max_attempts;
  clap["backtranslation_threshold"] = config.clap.backtranslation_threshold;
  clap["example_seed"] = config.clap.example_seed;
  clap["casefold"] = config.clap.matching.casefold;
  clap["instruction_template"] = config.clap.instruction_template;
  if (!config.examples_path.empty()) clap["examples_path"] = config.examples_path;
  j["clap"] = std::move(clap);
  j["marker_scheme"] = config.marker_scheme;
  if (!config.alignment_path.empty() || !config.alignment_lexicon.empty()) {
    nlohmann::ordered_json alignment;
    if (!config.alignment_path.empty()) alignment["path"] = config.alignment_path;
    if (!config.alignment_lexicon.empty()) alignment["lexicon"] = config.alignment_lexicon;
    j["alignment"] = std::move(alignment);
  }
  return j;
}

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides) {
  if (overrides.method) config.method = *overrides.method;
  if (overrides.corpus) config.corpus_path = *overrides.corpus;
  if (overrides.out) config.out_path = *overrides.out;
  if (overrides.cache) config.cache_path = *overrides.cache;
  if (overrides.cache_mode) {
    cache_mode_from_name(*overrides.cache_mode);
    config.cache_mode = *overrides.cache_mode;
  }
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.concurrency) config.max_concurrency = *overrides.concurrency;
}

void validate_config(const RunConfig& config, bool for_project) {
  if (config.source_lang.empty() || config.target_lang.empty()) {
    throw ConfigError("source_lang and target_lang are required");
  }
  if (!config.translator.present()) {
    throw ConfigError("a translator backend is required");
  }
  if (config.max_concurrency < 1) {
    throw ConfigError("max_concurrency must be >= 1");
  }
  if (!for_project) {
    return;
  }
  if (config.corpus_path.empty()) {
    throw ConfigError("a corpus path is required (config \"corpus\" or --corpus)");
  }
  if (config.out_path.empty()) {
    throw ConfigError("an output path is required (config \"out\" or --out)");
  }
  if (config.roles_path.empty()) {
    throw ConfigError("a role registry is required (config \"roles\")");
  }
  const Method method = [&] {
    try {
      return method_from_name(config.method);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }();
  switch (method) {
    case Method::clap:
      if (!config.contextual.present()) {
        throw ConfigError("method clap needs a contextual backend");
      }
      if (config.clap.num_incontext_examples > 0 && config.examples_path.empty()) {
        throw ConfigError(
            "method clap with num_incontext_examples > 0 needs clap.examples_path "
            "(generate one with the examples command)");
      }
      break;
    case Method::align:
      if (config.alignment_path.empty() && config.alignment_lexicon.empty()) {
        throw ConfigError("method align needs an alignment source (alignment.path or "
                          "alignment.lexicon)");
      }
      break;
    case Method::marker:
      MarkerScheme::parse(config.marker_scheme);
      break;
    default:
      break;
  }
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json semantic;
  semantic["source_lang"] = config.source_lang;
  semantic["target_lang"] = config.target_lang;
  semantic["method"] = config.method;
  semantic["seed"] = config.seed;
  semantic["max_concurrency"] = config.max_concurrency;
  semantic["translator"] = backend_semantic_json(config.translator);
  semantic["contextual"] = backend_semantic_json(config.contextual);
  nlohmann::json clap;
  clap["num_incontext_examples"] = config.clap.num_incontext_examples;
  clap["max_attempts"] = config.clap.max_attempts;
  clap["backtranslation_threshold"] = config.clap.backtranslation_threshold;
  clap["example_seed"] = config.clap.example_seed;
  clap["casefold"] = config.clap.matching.casefold;
  clap["instruction_template"] = config.clap.instruction_template;
  if (!config.examples_path.empty()) {
    clap["examples_digest"] = digest_file(config.examples_path);
  }
  semantic["clap"] = std::move(clap);
  semantic["marker_scheme"] = config.marker_scheme;
  if (!config.alignment_path.empty()) {
    semantic["alignment_digest"] = digest_file(config.alignment_path);
  }
  if (!config.alignment_lexicon.empty()) {
    semantic["alignment_lexicon_digest"] = digest_file(config.alignment_lexicon);
  }
  return canonical_digest(semantic);
}

}  // namespace labelproj
