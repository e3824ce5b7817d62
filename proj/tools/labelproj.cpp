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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "labelproj/clap.hpp"
#include "labelproj/config.hpp"
#include "labelproj/corpus.hpp"
#include "labelproj/errors.hpp"
#include "labelproj/evaluation.hpp"
#include "labelproj/pipeline.hpp"

namespace {

using namespace labelproj;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitValidation = 4;

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

nlohmann::ordered_json cache_stats_json(const BackendSet& backends, const RunConfig& config) {
  if (!backends.cache) {
    return nullptr;
  }
  const CacheStats stats = backends.cache->stats();
  nlohmann::ordered_json j;
  j["path"] = config.cache_path;
  j["mode"] = config.cache_mode;
  j["loaded"] = stats.loaded;
  j["hits"] = stats.hits;
  j["misses"] = stats.misses;
  j["appends"] = stats.appends;
  return j;
}

struct ProjectArgs {
  std::string config_path;
  ConfigOverrides overrides;
};

int cmd_project(const ProjectArgs& args) {
  RunConfig config = load_config(args.config_path);
  apply_overrides(config, args.overrides);
  validate_config(config, /*for_project=*/true);
  const std::string hash = config_hash(config);

  const RoleRegistry registry = RoleRegistry::load(config.roles_path);
  const Corpus corpus = load_corpus(config.corpus_path, registry);
  BackendSet backends = build_backends(config);

  const RunOutcome outcome = run_projection(config, corpus, backends, hash);
  save_projected(outcome.completed, config.out_path);

  nlohmann::ordered_json manifest;
  manifest["command"] = "project";
  manifest["config"] = config_to_json(config);
  manifest["config_hash"] = hash;
  manifest["corpus"] = {{"path", config.corpus_path}, {"sentences", corpus.sentences.size()}};
  manifest["cache"] = cache_stats_json(backends, config);
  if (!outcome.completed.empty()) {
    const FaithfulnessReport report = faithfulness_rate(outcome.completed);
    manifest["faithfulness"] = {{"datapoint_rate", round_percent(report.datapoint_rate)},
                                {"label_rate", round_percent(report.label_rate)}};
  }
  manifest["outputs"] = {config.out_path};
  manifest["partial"] = static_cast<bool>(outcome.first_error);

  if (outcome.first_error) {
    std::string message = "projection failed";
    try {
      std::rethrow_exception(outcome.first_error);
    } catch (const std::exception& e) {
      message = e.what();
    }
    nlohmann::ordered_json marker;
    marker["error"] = message;
    marker["completed"] = outcome.completed.size();
    marker["total"] = corpus.sentences.size();
    write_json_file(config.out_path + ".partial", marker);
    write_json_file(config.out_path + ".manifest.json", manifest);
    std::rethrow_exception(outcome.first_error);
  }

  write_json_file(config.out_path + ".manifest.json", manifest);
  std::cout << "projected " << outcome.completed.size() << " datapoints (" << config.method
            << ") -> " << config.out_path << "\n";
  if (!outcome.completed.empty()) {
    std::cout << report_to_table(faithfulness_rate(outcome.completed));
  }
  return kExitOk;
}

struct ExamplesArgs {
  std::string config_path;
  std::string pool_path;
  std::string out_path;
  ConfigOverrides overrides;
};

int cmd_examples(const ExamplesArgs& args) {
  RunConfig config = load_config(args.config_path);
  apply_overrides(config, args.overrides);
  if (!args.pool_path.empty()) {
    config.corpus_path = args.pool_path;
  }
  if (!args.out_path.empty()) {
    config.out_path = args.out_path;
  }
  if (config.corpus_path.empty() || config.out_path.empty()) {
    throw ConfigError("examples needs a pool corpus (--pool) and an output path (--out)");
  }
  validate_config(config, /*for_project=*/false);
  if (!config.contextual.present()) {
    throw ConfigError("examples needs a contextual backend");
  }
  if (config.roles_path.empty()) {
    throw ConfigError("examples needs a role registry (config \"roles\")");
  }

  const RoleRegistry registry = RoleRegistry::load(config.roles_path);
  const Corpus pool = load_corpus(config.corpus_path, registry);
  BackendSet backends = build_backends(config);

  const std::vector<InContextExample> examples =
      generate_incontext_examples(pool, *backends.translator, *backends.contextual, config.clap,
                                  config.source_lang, config.target_lang);
  save_incontext_examples(examples, config.out_path);

  nlohmann::ordered_json manifest;
  manifest["command"] = "examples";
  manifest["config"] = config_to_json(config);
  manifest["config_hash"] = config_hash(config);
  manifest["pool"] = {{"path", config.corpus_path}, {"sentences", pool.sentences.size()}};
  manifest["cache"] = cache_stats_json(backends, config);
  manifest["outputs"] = {config.out_path};
  write_json_file(config.out_path + ".manifest.json", manifest);

  std::cout << "accepted " << examples.size() << " in-context examples -> " << config.out_path
            << "\n";
  return kExitOk;
}

int cmd_filter(const std::string& in_path, const std::string& out_path) {
  const std::vector<ProjectedDatapoint> projected = load_projected(in_path);
  const Corpus corpus = filter_translate_train(projected);
  save_corpus(corpus, out_path);
  std::cout << "retained " << corpus.sentences.size() << " of " << projected.size()
            << " datapoints -> " << out_path << "\n";
  return kExitOk;
}

int cmd_metrics(const std::string& in_path, const std::string& out_path) {
  const std::vector<ProjectedDatapoint> projected = load_projected(in_path);
  const FaithfulnessReport report = faithfulness_rate(projected);
  std::cout << report_to_table(report);
  if (!out_path.empty()) {
    write_json_file(out_path, report_to_json(report));
  } else {
    std::cout << report_to_json(report).dump(2) << "\n";
  }
  return kExitOk;
}

struct AbExportArgs {
  std::string corpus_path;
  std::string roles_path;
  std::string run_a;
  std::string run_b;
  std::string out_annotations;
  std::string out_sealed;
  std::string name_a;
  std::string name_b;
  std::size_t n = 50;
  std::uint64_t seed = 0;
};

int cmd_ab_export(const AbExportArgs& args) {
  const std::filesystem::path annotations_dir =
      std::filesystem::absolute(args.out_annotations).parent_path();
  const std::filesystem::path sealed_dir =
      std::filesystem::absolute(args.out_sealed).parent_path();
  if (annotations_dir == sealed_dir) {
    throw ConfigError(
        "the sealed assignment must not sit next to the annotation file; choose different "
        "directories");
  }
  const RoleRegistry registry = RoleRegistry::load(args.roles_path);
  const Corpus source = load_corpus(args.corpus_path, registry);
  const AbExport exported = export_ab(source, load_projected(args.run_a),
                                      load_projected(args.run_b), args.n, args.seed, args.name_a,
                                      args.name_b);
  save_annotations(exported.annotations, args.out_annotations);
  save_sealed(exported.sealed, args.out_sealed);
  std::cout << "exported " << exported.annotations.size() << " blinded pairs -> "
            << args.out_annotations << "\n";
  return kExitOk;
}

int cmd_ab_score(const std::string& annotations_path, const std::string& sealed_path,
                 const std::string& out_path) {
  const AbScore score =
      score_ab(load_annotations(annotations_path), load_sealed(sealed_path));
  nlohmann::ordered_json j;
  j["pairs"] = score.pairs;
  j["methods"] = {score.method_1, score.method_2};
  j["win"] = {{score.method_1, round_percent(score.win_1)},
              {score.method_2, round_percent(score.win_2)}};
  j["tie"] = round_percent(score.tie);
  std::cout << score.method_1 << " win " << round_percent(score.win_1) << "% / tie "
            << round_percent(score.tie) << "% / " << score.method_2 << " win "
            << round_percent(score.win_2) << "%\n";
  if (!out_path.empty()) {
    write_json_file(out_path, j);
  }
  return kExitOk;
}

int cmd_cache_stats(const std::string& cache_path) {
  ReplayCache cache(cache_path, CacheMode::replay);
  std::cout << "entries: " << cache.size() << "\n";
  for (const auto& [key, count] : cache.entries_by_backend_op()) {
    std::cout << "  " << key << ": " << count << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"span-label projection through machine translation"};
  app.require_subcommand(1);

  ProjectArgs project_args;
  ExamplesArgs examples_args;
  std::string filter_in, filter_out;
  std::string metrics_in, metrics_out;
  AbExportArgs ab_export_args;
  std::string ab_annotations, ab_sealed, ab_out;
  std::string stats_cache;

  auto add_overrides = [](CLI::App* cmd, ConfigOverrides& o) {
    cmd->add_option("--method", o.method, "projection method");
    cmd->add_option("--corpus", o.corpus, "corpus JSONL path");
    cmd->add_option("--out", o.out, "output path");
    cmd->add_option("--cache", o.cache, "replay cache path");
    cmd->add_option("--cache-mode", o.cache_mode, "record|replay|passthrough");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--concurrency", o.concurrency, "max concurrent sentences");
  };

  CLI::App* project = app.add_subcommand("project", "project a corpus into the target language");
  project->add_option("--config", project_args.config_path, "config JSON (or a run manifest)")
      ->required();
  add_overrides(project, project_args.overrides);

  CLI::App* examples =
      app.add_subcommand("examples", "generate back-translation-verified in-context examples");
  examples->add_option("--config", examples_args.config_path, "config JSON")->required();
  examples->add_option("--pool", examples_args.pool_path, "pool corpus JSONL");
  examples->add_option("--out", examples_args.out_path, "output examples JSONL");
  add_overrides(examples, examples_args.overrides);

  CLI::App* filter = app.add_subcommand("filter", "keep only fully faithful datapoints");
  filter->add_option("--in", filter_in, "projected JSONL")->required();
  filter->add_option("--out", filter_out, "output corpus JSONL")->required();

  CLI::App* metrics = app.add_subcommand("metrics", "faithfulness rates of a projected file");
  metrics->add_option("--in", metrics_in, "projected JSONL")->required();
  metrics->add_option("--out", metrics_out, "report JSON path");

  CLI::App* ab_export = app.add_subcommand("ab-export", "export blinded A/B annotation pairs");
  ab_export->add_option("--corpus", ab_export_args.corpus_path, "source corpus JSONL")->required();
  ab_export->add_option("--roles", ab_export_args.roles_path, "role registry JSON")->required();
  ab_export->add_option("--run-a", ab_export_args.run_a, "projected JSONL, first system")
      ->required();
  ab_export->add_option("--run-b", ab_export_args.run_b, "projected JSONL, second system")
      ->required();
  ab_export->add_option("--out-annotations", ab_export_args.out_annotations, "annotation JSONL")
      ->required();
  ab_export->add_option("--out-sealed", ab_export_args.out_sealed, "sealed assignment JSONL")
      ->required();
  ab_export->add_option("--n", ab_export_args.n, "number of pairs");
  ab_export->add_option("--seed", ab_export_args.seed, "sampling seed");
  ab_export->add_option("--name-a", ab_export_args.name_a, "override method name for run A");
  ab_export->add_option("--name-b", ab_export_args.name_b, "override method name for run B");

  CLI::App* ab_score = app.add_subcommand("ab-score", "unblind verdicts and tally win rates");
  ab_score->add_option("--annotations", ab_annotations, "annotation JSONL with verdicts")
      ->required();
  ab_score->add_option("--sealed", ab_sealed, "sealed assignment JSONL")->required();
  ab_score->add_option("--out", ab_out, "report JSON path");

  CLI::App* cache_stats = app.add_subcommand("cache-stats", "summarize a replay cache file");
  cache_stats->add_option("--cache", stats_cache, "cache JSONL path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (project->parsed()) return cmd_project(project_args);
    if (examples->parsed()) return cmd_examples(examples_args);
    if (filter->parsed()) return cmd_filter(filter_in, filter_out);
    if (metrics->parsed()) return cmd_metrics(metrics_in, metrics_out);
    if (ab_export->parsed()) return cmd_ab_export(ab_export_args);
    if (ab_score->parsed()) return cmd_ab_score(ab_annotations, ab_sealed, ab_out);
    if (cache_stats->parsed()) return cmd_cache_stats(stats_cache);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const InsufficientExamplesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
