// Copyright 2026 The mechanism-lfd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mlfd/harness/config.hpp"
#include "mlfd/harness/experiment.hpp"

namespace mlfd::harness {

inline constexpr const char* kAverageColumn = "average";

struct ReportCell {
  Task task = Task::kOpen;
  std::string fixture;  // kAverageColumn for the per-task mean
  int successes = 0;
  int trials = 0;
  double percent = 0.0;  // successes / trials * 100, or the mean of the fixture cells
};

struct ReportRow {
  Method method = Method::kAugmented;
  std::vector<ReportCell> cells;  // task-major, fixtures in first-seen order
};

struct ExperimentReport {
  std::vector<Task> tasks;
  std::vector<std::string> fixtures;
  std::vector<ReportRow> rows;
  std::vector<std::uint64_t> seeds;  // distinct trial-suite seeds, first-seen order
  nlohmann::json config;             // suite echo, null when built from bare results
};

/// Aggregates trials into success percentages. The average column appears only
/// with more than one fixture. Throws InvalidArgument on empty input.
ExperimentReport report_table(const std::vector<TrialResult>& results);
ExperimentReport report_table(const std::vector<TrialResult>& results, const SuiteConfig& suite);

std::string render_table(const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);

/// Writes report.json (report plus per-trial results) and table.txt. Throws IoError.
void write_report(const std::string& dir, const ExperimentReport& report,
                  const std::vector<TrialResult>& results);

}  // namespace mlfd::harness
