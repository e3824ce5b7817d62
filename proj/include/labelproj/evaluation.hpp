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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "labelproj/corpus.hpp"

namespace labelproj {

struct MethodCounts {
  std::size_t datapoints = 0;
  std::size_t faithful_datapoints = 0;
  std::size_t labels = 0;
  std::size_t faithful_labels = 0;
};

struct FaithfulnessReport {
  double datapoint_rate = 0.0;  // percent; label-free datapoints count as faithful
  double label_rate = 0.0;      // percent over all records
  std::size_t total_datapoints = 0;
  std::size_t faithful_datapoints = 0;
  std::size_t total_labels = 0;
  std::size_t faithful_labels = 0;
  std::map<std::string, MethodCounts> per_method;
};

/// Reporting resolution for all percentages: 0.1, round-half-up.
double round_percent(double value);

/// Raises ValidationError on empty input (the rate is undefined).
FaithfulnessReport faithfulness_rate(const std::vector<ProjectedDatapoint>& projected);

nlohmann::ordered_json report_to_json(const FaithfulnessReport& report);
std::string report_to_table(const FaithfulnessReport& report);

/// Keeps exactly the fully faithful datapoints as a target-language
/// corpus; every retained sentence re-validates against the corpus
/// invariants.
Corpus filter_translate_train(const std::vector<ProjectedDatapoint>& projected);

struct AbAnnotationRow {
  std::string pair_id;
  std::string source_label;
  std::string side_a;
  std::string side_b;
  std::string verdict;  // empty until annotated; "A" | "B" | "tie"
};

struct AbSealedRow {
  std::string pair_id;
  std::string method_a;
  std::string method_b;
};

struct AbExport {
  std::vector<AbAnnotationRow> annotations;
  std::vector<AbSealedRow> sealed;
};

/// Samples n labels (seeded, without replacement) for which both runs
/// produced a candidate, over the shared source corpus. Side order is
/// derived from the seed and the unordered candidate pair, so the
/// annotation file is bit-identical under swapping the two runs; only
/// the sealed assignment differs.
AbExport export_ab(const Corpus& source, const std::vector<ProjectedDatapoint>& run_a,
                   const std::vector<ProjectedDatapoint>& run_b, std::size_t n,
                   std::uint64_t seed, const std::string& method_a_name = "",
                   const std::string& method_b_name = "");

struct AbScore {
  std::string method_1;  // lexicographically first of the two methods
  std::string method_2;
  double win_1 = 0.0;  // percent
  double tie = 0.0;
  double win_2 = 0.0;
  std::size_t pairs = 0;

  double win(const std::string& method) const;
};

/// Unblinds verdicts via the sealed assignment and tallies win/tie/win
/// percentages. Every exported pair needs exactly one verdict.
AbScore score_ab(const std::vector<AbAnnotationRow>& verdicts,
                 const std::vector<AbSealedRow>& sealed);

void save_annotations(const std::vector<AbAnnotationRow>& rows,
                      const std::filesystem::path& path);
std::vector<AbAnnotationRow> load_annotations(const std::filesystem::path& path);
void save_sealed(const std::vector<AbSealedRow>& rows, const std::filesystem::path& path);
std::vector<AbSealedRow> load_sealed(const std::filesystem::path& path);

}  // namespace labelproj
