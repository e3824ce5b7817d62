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

#include "labelproj/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "labelproj/digest.hpp"
#include "labelproj/errors.hpp"
#include "labelproj/rand_util.hpp"

namespace labelproj {

double round_percent(double value) { return std::floor(value * 10.0 + 0.5) / 10.0; }

FaithfulnessReport faithfulness_rate(const std::vector<ProjectedDatapoint>& projected) {
  if (projected.empty()) {
    throw ValidationError("faithfulness rate is undefined for an empty input");
  }
  FaithfulnessReport report;
  report.total_datapoints = projected.size();
  for (const ProjectedDatapoint& dp : projected) {
    const std::string method = dp.provenance.method.empty() ? "?" : dp.provenance.method;
    MethodCounts& counts = report.per_method[method];
    ++counts.datapoints;
    if (dp.datapoint_faithful) {
      ++report.faithful_datapoints;
      ++counts.faithful_datapoints;
    }
    for (const ProjectionRecord& record : dp.records) {
      ++report.total_labels;
      ++counts.labels;
      if (record.faithful) {
        ++report.faithful_labels;
        ++counts.faithful_labels;
      }
    }
  }
  report.datapoint_rate = 100.0 * static_cast<double>(report.faithful_datapoints) /
                          static_cast<double>(report.total_datapoints);
  report.label_rate = report.total_labels == 0
                          ? 100.0
                          : 100.0 * static_cast<double>(report.faithful_labels) /
                                static_cast<double>(report.total_labels);
  return report;
}

nlohmann::ordered_json report_to_json(const FaithfulnessReport& report) {
  nlohmann::ordered_json j;
  j["datapoint_rate"] = round_percent(report.datapoint_rate);
  j["label_rate"] = round_percent(report.label_rate);
  j["total_datapoints"] = report.total_datapoints;
  j["faithful_datapoints"] = report.faithful_datapoints;
  j["total_labels"] = report.total_labels;
  j["faithful_labels"] = report.faithful_labels;
  j["per_method"] = nlohmann::ordered_json::object();
  for (const auto& [method, counts] : report.per_method) {
    nlohmann::ordered_json m;
    m["datapoints"] = counts.datapoints;
    m["faithful_datapoints"] = counts.faithful_datapoints;
    m["labels"] = counts.labels;
    m["faithful_labels"] = counts.faithful_labels;
    j["per_method"][method] = std::move(m);
  }
  j["note"] = "label-free datapoints count as faithful";
  return j;
}

std::string report_to_table(const FaithfulnessReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-28s %6.1f%%  (%zu/%zu)\n", "datapoint faithfulness",
                round_percent(report.datapoint_rate), report.faithful_datapoints,
                report.total_datapoints);
  out += line;
  std::snprintf(line, sizeof(line), "%-28s %6.1f%%  (%zu/%zu)\n", "label faithfulness",
                round_percent(report.label_rate), report.faithful_labels, report.total_labels);
  out += line;
  for (const auto& [method, counts] : report.per_method) {
    const double rate = counts.datapoints == 0
                            ? 0.0
                            : 100.0 * static_cast<double>(counts.faithful_datapoints) /
                                  static_cast<double>(counts.datapoints);
    std::snprintf(line, sizeof(line), "  method %-19s %6.1f%%  (%zu/%zu datapoints)\n",
                  method.c_str(), round_percent(rate), counts.faithful_datapoints,
                  counts.datapoints);
    out += line;
  }
  return out;
}

Corpus filter_translate_train(const std::vector<ProjectedDatapoint>& projected) {
  Corpus corpus;
  for (const ProjectedDatapoint& dp : projected) {
    if (!dp.datapoint_faithful) {
      continue;
    }
    if (corpus.sentences.empty()) {
      corpus.language = dp.language;
    } else if (dp.language != corpus.language) {
      throw ValidationError("projected datapoints mix target languages \"" + corpus.language +
                            "\" and \"" + dp.language + "\"");
    }
    LabeledSentence sentence{dp.source_ref.doc_id, dp.source_ref.sent_id, dp.language,
                             dp.target_text, dp.events};
    RoleRegistry observed;
    for (const EventFrame& event : sentence.events) {
      for (const Label& arg : event.arguments) {
        observed.roles.insert(arg.role);
      }
    }
    validate_sentence(sentence, observed);
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

namespace {

using LabelKey = std::tuple<std::string, std::string, std::string>;  // doc, sent, label

std::map<LabelKey, std::string> candidates_by_label(const std::vector<ProjectedDatapoint>& run) {
  std::map<LabelKey, std::string> out;
  for (const ProjectedDatapoint& dp : run) {
    for (const ProjectionRecord& record : dp.records) {
      if (record.candidate) {
        out[{dp.source_ref.doc_id, dp.source_ref.sent_id, record.label_id}] = *record.candidate;
      }
    }
  }
  return out;
}

std::string run_method_name(const std::vector<ProjectedDatapoint>& run,
                            const std::string& override_name, const char* which) {
  if (!override_name.empty()) {
    return override_name;
  }
  if (run.empty()) {
    throw ValidationError(std::string("run ") + which + " is empty");
  }
  return run.front().provenance.method;
}

}  // namespace

AbExport export_ab(const Corpus& source, const std::vector<ProjectedDatapoint>& run_a,
                   const std::vector<ProjectedDatapoint>& run_b, std::size_t n,
                   std::uint64_t seed, const std::string& method_a_name,
                   const std::string& method_b_name) {
  const std::string name_a = run_method_name(run_a, method_a_name, "A");
  const std::string name_b = run_method_name(run_b, method_b_name, "B");
  if (name_a == name_b) {
    throw ValidationError("the two runs report the same method name \"" + name_a +
                          "\"; pass distinct names");
  }

  std::map<LabelKey, std::string> surfaces;
  for (const LabeledSentence& sentence : source.sentences) {
    for (const Label* label : labels_in_span_order(sentence)) {
      surfaces[{sentence.doc_id, sentence.sent_id, label->label_id}] = label->surface;
    }
  }
  const std::map<LabelKey, std::string> cands_a = candidates_by_label(run_a);
  const std::map<LabelKey, std::string> cands_b = candidates_by_label(run_b);

  std::vector<LabelKey> common;
  for (const auto& [key, cand] : cands_a) {
    if (cands_b.count(key) > 0 && surfaces.count(key) > 0) {
      common.push_back(key);
    }
  }
  if (common.size() < n) {
    throw ValidationError("only " + std::to_string(common.size()) +
                          " labels have candidates from both runs, need " + std::to_string(n));
  }

  seeded_shuffle(common, seed);
  common.resize(n);

  AbExport out;
  for (std::size_t i = 0; i < common.size(); ++i) {
    const LabelKey& key = common[i];
    const std::string& cand_a = cands_a.at(key);
    const std::string& cand_b = cands_b.at(key);
    const std::string& low = std::min(cand_a, cand_b);
    const std::string& high = std::max(cand_a, cand_b);

    // Side order depends only on the seed and the unordered pair, never
    // on which run came first: swapping the runs must not change the
    // annotation file.
    const nlohmann::json flip_input = {{"seed", seed},
                                       {"doc", std::get<0>(key)},
                                       {"sent", std::get<1>(key)},
                                       {"label", std::get<2>(key)},
                                       {"low", low},
                                       {"high", high}};
    const std::string digest = canonical_digest(flip_input);
    const bool flip = (digest.back() == '1' || digest.back() == '3' || digest.back() == '5' ||
                       digest.back() == '7' || digest.back() == '9' || digest.back() == 'b' ||
                       digest.back() == 'd' || digest.back() == 'f');
    const std::string& side_a = flip ? high : low;
    const std::string& side_b = flip ? low : high;

    std::string method_of_a;
    std::string method_of_b;
    if (cand_a == cand_b) {
      method_of_a = std::min(name_a, name_b);
      method_of_b = std::max(name_a, name_b);
    } else {
      method_of_a = (side_a == cand_a) ? name_a : name_b;
      method_of_b = (side_a == cand_a) ? name_b : name_a;
    }

    char pair_id[32];
    std::snprintf(pair_id, sizeof(pair_id), "pair-%04zu", i + 1);
    out.annotations.push_back(
        AbAnnotationRow{pair_id, surfaces.at(key), side_a, side_b, ""});
    out.sealed.push_back(AbSealedRow{pair_id, method_of_a, method_of_b});
  }
  return out;
}

double AbScore::win(const std::string& method) const {
  if (method == method_1) {
    return win_1;
  }
  if (method == method_2) {
    return win_2;
  }
  throw ValidationError("method \"" + method + "\" not part of this comparison");
}

AbScore score_ab(const std::vector<AbAnnotationRow>& verdicts,
                 const std::vector<AbSealedRow>& sealed) {
  std::map<std::string, const AbSealedRow*> sealed_by_id;
  std::set<std::string> methods;
  for (const AbSealedRow& row : sealed) {
    if (!sealed_by_id.emplace(row.pair_id, &row).second) {
      throw ValidationError("duplicate pair_id \"" + row.pair_id + "\" in sealed assignment");
    }
    methods.insert(row.method_a);
    methods.insert(row.method_b);
  }
  if (methods.size() != 2) {
    throw ValidationError("sealed assignment must cover exactly two methods, found " +
                          std::to_string(methods.size()));
  }
  if (verdicts.size() != sealed.size()) {
    throw ValidationError("verdict count " + std::to_string(verdicts.size()) +
                          " does not match sealed pair count " + std::to_string(sealed.size()));
  }

  std::map<std::string, std::size_t> wins;
  std::size_t ties = 0;
  std::set<std::string> seen;
  for (const AbAnnotationRow& row : verdicts) {
    auto it = sealed_by_id.find(row.pair_id);
    if (it == sealed_by_id.end()) {
      throw ValidationError("pair \"" + row.pair_id + "\" missing from sealed assignment");
    }
    if (!seen.insert(row.pair_id).second) {
      throw ValidationError("duplicate verdict for pair \"" + row.pair_id + "\"");
    }
    std::string verdict = row.verdict;
    std::transform(verdict.begin(), verdict.end(), verdict.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (verdict == "a") {
      ++wins[it->second->method_a];
    } else if (verdict == "b") {
      ++wins[it->second->method_b];
    } else if (verdict == "tie") {
      ++ties;
    } else if (verdict.empty()) {
      throw ValidationError("missing verdict for pair \"" + row.pair_id + "\"");
    } else {
      throw ValidationError("pair \"" + row.pair_id + "\": verdict must be A, B or tie, got \"" +
                            row.verdict + "\"");
    }
  }

  AbScore score;
  auto m = methods.begin();
  score.method_1 = *m++;
  score.method_2 = *m;
  score.pairs = sealed.size();
  const double total = static_cast<double>(score.pairs);
  score.win_1 = 100.0 * static_cast<double>(wins[score.method_1]) / total;
  score.win_2 = 100.0 * static_cast<double>(wins[score.method_2]) / total;
  score.tie = 100.0 * static_cast<double>(ties) / total;
  return score;
}

void save_annotations(const std::vector<AbAnnotationRow>& rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write annotation file " + path.string());
  }
  for (const AbAnnotationRow& row : rows) {
    nlohmann::ordered_json j;
    j["pair_id"] = row.pair_id;
    j["source_label"] = row.source_label;
    j["side_a"] = row.side_a;
    j["side_b"] = row.side_b;
    if (row.verdict.empty()) {
      j["verdict"] = nullptr;
    } else {
      j["verdict"] = row.verdict;
    }
    out << j.dump() << '\n';
  }
}

std::vector<AbAnnotationRow> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open annotation file " + path.string());
  }
  std::vector<AbAnnotationRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      AbAnnotationRow row;
      row.pair_id = j.at("pair_id").get<std::string>();
      row.source_label = j.value("source_label", "");
      row.side_a = j.value("side_a", "");
      row.side_b = j.value("side_b", "");
      if (j.contains("verdict") && j["verdict"].is_string()) {
        row.verdict = j["verdict"].get<std::string>();
      }
      rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

void save_sealed(const std::vector<AbSealedRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write sealed assignment " + path.string());
  }
  for (const AbSealedRow& row : rows) {
    nlohmann::ordered_json j;
    j["pair_id"] = row.pair_id;
    j["a"] = row.method_a;
    j["b"] = row.method_b;
    out << j.dump() << '\n';
  }
}

std::vector<AbSealedRow> load_sealed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open sealed assignment " + path.string());
  }
  std::vector<AbSealedRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      rows.push_back(AbSealedRow{j.at("pair_id").get<std::string>(),
                                 j.at("a").get<std::string>(), j.at("b").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace labelproj
