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

#include "mlfd/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mlfd/common/error.hpp"

namespace mlfd::harness {

using nlohmann::json;

namespace {

const char* task_title(Task t) {
  switch (t) {
    case Task::kGrasp: return "Grasp";
    case Task::kOpen: return "Open";
    case Task::kFullTask: return "Full-Task";
  }
  return "?";
}

const char* method_title(Method m) { return m == Method::kAugmented ? "w/ augmentation" : "w/o augmentation"; }

std::string format_percent(const ReportCell& c) {
  if (c.trials == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f%%", c.percent);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace

ExperimentReport report_table(const std::vector<TrialResult>& results) {
  if (results.empty()) throw Error(ErrorCode::kInvalidArgument, "no trial results to report");
  ExperimentReport rep;
  std::vector<Method> methods;
  std::map<std::tuple<Method, Task, std::string>, std::pair<int, int>> counts;
  for (const TrialResult& r : results) {
    if (std::find(rep.tasks.begin(), rep.tasks.end(), r.task) == rep.tasks.end()) rep.tasks.push_back(r.task);
    if (std::find(rep.fixtures.begin(), rep.fixtures.end(), r.fixture) == rep.fixtures.end()) {
      rep.fixtures.push_back(r.fixture);
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(rep.seeds.begin(), rep.seeds.end(), r.seed) == rep.seeds.end()) rep.seeds.push_back(r.seed);
    auto& c = counts[{r.method, r.task, r.fixture}];
    c.first += r.success ? 1 : 0;
    c.second += 1;
  }
  std::sort(rep.tasks.begin(), rep.tasks.end());
  std::sort(methods.begin(), methods.end());
  const bool with_average = rep.fixtures.size() > 1;
  for (Method m : methods) {
    ReportRow row;
    row.method = m;
    for (Task t : rep.tasks) {
      double sum = 0.0;
      int filled = 0;
      ReportCell avg{t, kAverageColumn, 0, 0, 0.0};
      for (const std::string& f : rep.fixtures) {
        ReportCell cell{t, f, 0, 0, 0.0};
        auto it = counts.find({m, t, f});
        if (it != counts.end()) {
          cell.successes = it->second.first;
          cell.trials = it->second.second;
          cell.percent = 100.0 * cell.successes / cell.trials;
          sum += cell.percent;
          ++filled;
          avg.successes += cell.successes;
          avg.trials += cell.trials;
        }
        row.cells.push_back(cell);
      }
      if (with_average) {
        avg.percent = filled > 0 ? sum / filled : 0.0;
        if (filled == 0) avg.trials = 0;
        row.cells.push_back(avg);
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

ExperimentReport report_table(const std::vector<TrialResult>& results, const SuiteConfig& suite) {
  ExperimentReport rep = report_table(results);
  rep.config = suite_to_json(suite);
  return rep;
}

std::string render_table(const ExperimentReport& report) {
  const std::size_t per_task = report.rows.empty() ? 0 : report.rows.front().cells.size() / report.tasks.size();
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{"method"};
  for (std::size_t t = 0; t < report.tasks.size(); ++t) {
    for (std::size_t i = 0; i < per_task; ++i) {
      head.push_back(i < report.fixtures.size() ? report.fixtures[i] : kAverageColumn);
    }
  }
  grid.push_back(head);
  for (const ReportRow& row : report.rows) {
    std::vector<std::string> line{method_title(row.method)};
    for (const ReportCell& c : row.cells) line.push_back(format_percent(c));
    grid.push_back(line);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  // Task titles span their fixture columns.
  std::string title = pad("", width[0]);
  for (std::size_t t = 0; t < report.tasks.size(); ++t) {
    std::size_t span = 0;
    for (std::size_t i = 0; i < per_task; ++i) span += width[1 + t * per_task + i] + 2;
    title += "  " + pad(task_title(report.tasks[t]), span - 2);
  }
  std::ostringstream os;
  auto emit = [&os](std::string text) {
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  };
  emit(title);
  for (const auto& line : grid) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) text += (i == 0 ? "" : "  ") + pad(line[i], width[i]);
    emit(text);
  }
  return os.str();
}

json report_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const ReportRow& row : report.rows) {
    json cells = json::array();
    for (const ReportCell& c : row.cells) {
      cells.push_back({{"task", to_string(c.task)},
                       {"fixture", c.fixture},
                       {"successes", c.successes},
                       {"trials", c.trials},
                       {"percent", c.percent}});
    }
    rows.push_back({{"method", to_string(row.method)}, {"cells", cells}});
  }
  json tasks = json::array();
  for (Task t : report.tasks) tasks.push_back(to_string(t));
  return {{"tasks", tasks},
          {"fixtures", report.fixtures},
          {"rows", rows},
          {"seeds", report.seeds},
          {"config", report.config}};
}

void write_report(const std::string& dir, const ExperimentReport& report,
                  const std::vector<TrialResult>& results) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  json doc = report_to_json(report);
  json trials = json::array();
  for (const TrialResult& r : results) trials.push_back(trial_to_json(r));
  doc["trials"] = trials;
  write_file(std::filesystem::path(dir) / "report.json", doc.dump(2) + "\n");
  write_file(std::filesystem::path(dir) / "table.txt", render_table(report));
}

}  // namespace mlfd::harness
