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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <doctest.h>

#include "mlfd/common/error.hpp"
#include "mlfd/demo/segmentation.hpp"
#include "mlfd/demo/serialize.hpp"
#include "mlfd/demo/trajectory.hpp"
#include "mlfd/harness/config.hpp"
#include "mlfd/harness/experiment.hpp"
#include "mlfd/harness/report.hpp"
#include "mlfd/harness/service.hpp"
#include "mlfd/mechanism/loader.hpp"

// After Eigen (see service.cpp).
#include <httplib.h>

using namespace mlfd;
using namespace mlfd::harness;
using geometry::Vec3;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

PrepCache& shared_cache() {
  static PrepCache cache;
  return cache;
}

TrialResult fake(const std::string& fixture, Task task, Method method, bool success) {
  TrialResult r;
  r.fixture = fixture;
  r.task = task;
  r.method = method;
  r.success = success;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mlfd_harness_" + name);
  fs::remove_all(d);
  return d;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no mlfd::Error thrown");
  return ErrorCode::kInvalidArgument;
}

// L-shaped path: 6 cm along +x then 6 cm along +z, 1 mm steps at 100 Hz.
json l_shaped_demo() {
  demo::DemoTrajectory d;
  double t = 0.0;
  auto add = [&](const Vec3& p) {
    demo::DemoSample s;
    s.t = t;
    s.ee_pose = geometry::Pose::from_translation(p);
    d.samples.push_back(s);
    t += 0.01;
  };
  for (int i = 0; i <= 60; ++i) add(Vec3(0.5 + 0.001 * i, 0.0, 0.1));
  for (int i = 1; i <= 60; ++i) add(Vec3(0.56, 0.0, 0.1 + 0.001 * i));
  return demo::demo_to_json(d);
}

struct Api {
  Service service;
  int port = 0;
  Api() { port = service.start("127.0.0.1", 0); }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
  auto res = c.Post(path.c_str(), body.dump(), "application/json");
  REQUIRE(res);
  CHECK_MESSAGE(res->status == expect, path << " -> " << res->body);
  return json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, int expect = 200) {
  auto res = c.Get(path.c_str());
  REQUIRE(res);
  CHECK_MESSAGE(res->status == expect, path << " -> " << res->body);
  return json::parse(res->body);
}

// Polls frames page by page until the run is terminal.
json poll_run(httplib::Client& c, const std::string& sid, const std::string& rid, std::vector<json>& frames) {
  std::size_t from = 0;
  for (int attempt = 0; attempt < 6000; ++attempt) {
    const json page = get(c, "/sessions/" + sid + "/runs/" + rid + "/frames?from=" + std::to_string(from));
    for (const json& f : page["frames"]) frames.push_back(f);
    from = page["next"].get<std::size_t>();
    if (page["terminal"].get<bool>()) return page;
    if (page["frames"].empty()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  FAIL("run did not terminate");
  return {};
}

}  // namespace

TEST_CASE("scenario config round trip and validation") {
  ScenarioConfig c = grasp_scenario("lock2");
  c.seed = 42;
  c.trials = 3;
  c.plan_fixture = "lock1";
  const ScenarioConfig back = scenario_from_json(scenario_to_json(c));
  CHECK(back.fixture == "lock2");
  CHECK(back.plan_fixture == "lock1");
  CHECK(back.seed == 42);
  CHECK(back.trials == 3);
  CHECK(back.pose_change.enabled);
  CHECK(back.randomization.yaw == doctest::Approx(c.randomization.yaw));
  CHECK(back.light_min == doctest::Approx(0.6));

  json no_seed = scenario_to_json(c);
  no_seed.erase("seed");
  CHECK(code_of([&] { scenario_from_json(no_seed); }) == ErrorCode::kConfigError);
  json bad = scenario_to_json(c);
  bad["trials"] = -1;
  CHECK(code_of([&] { scenario_from_json(bad); }) == ErrorCode::kConfigError);
  bad = scenario_to_json(c);
  bad["light"] = {0.9, 0.5};
  CHECK(code_of([&] { scenario_from_json(bad); }) == ErrorCode::kConfigError);
  bad = scenario_to_json(c);
  bad["trials"] = "ten";
  CHECK(code_of([&] { scenario_from_json(bad); }) == ErrorCode::kConfigError);
  CHECK(code_of([] { task_from_string("dance"); }) == ErrorCode::kConfigError);
}

TEST_CASE("table1 suite shape and file loading") {
  const SuiteConfig s = table1_suite(7, 10);
  REQUIRE(s.entries.size() == 18);
  std::set<std::uint64_t> seeds;
  for (const SuiteEntry& e : s.entries) seeds.insert(e.scenario.seed);
  CHECK(seeds.size() == 18);
  CHECK(table1_suite(7, 10).entries[5].scenario.seed == s.entries[5].scenario.seed);
  CHECK(table1_suite(8, 10).entries[5].scenario.seed != s.entries[5].scenario.seed);

  const fs::path dir = scratch_dir("suite");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "suite.json");
    out << suite_to_json(s).dump(2);
  }
  const SuiteConfig back = load_suite_file((dir / "suite.json").string());
  CHECK(back.entries.size() == 18);
  CHECK(suite_to_json(back) == suite_to_json(s));
  {
    std::ofstream out(dir / "broken.json");
    out << "{\"name\": \"x\", \"entries\": [";
  }
  CHECK(code_of([&] { load_suite_file((dir / "broken.json").string()); }) == ErrorCode::kConfigError);
  json noseed = suite_to_json(s);
  noseed.erase("seed");
  CHECK(code_of([&] { suite_from_json(noseed); }) == ErrorCode::kConfigError);
  CHECK(code_of([&] { load_suite_file((dir / "missing.json").string()); }) == ErrorCode::kIoError);
}

TEST_CASE("report percentages and averages") {
  std::vector<TrialResult> rs;
  // lock1 7/10, lock2 10/10, lock3 4/10 open augmented; baseline 1/10 each.
  for (int i = 0; i < 10; ++i) {
    rs.push_back(fake("lock1", Task::kOpen, Method::kAugmented, i < 7));
    rs.push_back(fake("lock2", Task::kOpen, Method::kAugmented, true));
    rs.push_back(fake("lock3", Task::kOpen, Method::kAugmented, i < 4));
    rs.push_back(fake("lock1", Task::kOpen, Method::kBaseline, i == 0));
    rs.push_back(fake("lock2", Task::kOpen, Method::kBaseline, i == 0));
    rs.push_back(fake("lock3", Task::kOpen, Method::kBaseline, i == 0));
  }
  const ExperimentReport rep = report_table(rs);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].method == Method::kAugmented);
  REQUIRE(rep.rows[0].cells.size() == 4);
  CHECK(rep.rows[0].cells[0].percent == 70.0);
  CHECK(rep.rows[0].cells[1].percent == 100.0);
  CHECK(rep.rows[0].cells[2].percent == 40.0);
  CHECK(rep.rows[0].cells[3].fixture == kAverageColumn);
  CHECK(rep.rows[0].cells[3].percent == doctest::Approx(70.0));
  CHECK(rep.rows[1].cells[3].percent == doctest::Approx(10.0));
  for (const ReportRow& row : rep.rows) {
    for (const ReportCell& c : row.cells) {
      CHECK(c.percent >= 0.0);
      CHECK(c.percent <= 100.0);
      if (c.fixture != kAverageColumn) CHECK(c.percent == 100.0 * c.successes / c.trials);
    }
  }
  const std::string table = render_table(rep);
  CHECK(table.find("70%") != std::string::npos);
  CHECK(table.find("w/o augmentation") != std::string::npos);

  CHECK(code_of([] { report_table({}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("single fixture single method gives a 1x3 row") {
  std::vector<TrialResult> rs{fake("lock1", Task::kGrasp, Method::kAugmented, true),
                              fake("lock1", Task::kOpen, Method::kAugmented, false),
                              fake("lock1", Task::kFullTask, Method::kAugmented, true)};
  const ExperimentReport rep = report_table(rs);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].cells.size() == 3);
  CHECK(rep.rows[0].cells[1].percent == 0.0);
}

TEST_CASE("paper-shaped table has 2 rows of 12 cells") {
  std::vector<TrialResult> rs;
  for (const char* f : {"lock1", "lock2", "lock3"}) {
    for (Task t : {Task::kGrasp, Task::kOpen, Task::kFullTask}) {
      for (Method m : {Method::kAugmented, Method::kBaseline}) rs.push_back(fake(f, t, m, true));
    }
  }
  const ExperimentReport rep = report_table(rs);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].cells.size() == 12);
  CHECK(rep.rows[1].cells.size() == 12);
}

TEST_CASE("demo_forces baseline rotates by 60 degrees or drops the force") {
  const auto prep = shared_cache().get("lock1");
  Rng rng(3);
  int zero = 0;
  int total = 0;
  for (int k = 0; k < 200; ++k) {
    const demo::AugmentedPlan p = demo_forces_plan(prep->plan, rng);
    REQUIRE(p.steps.size() == prep->plan.steps.size());
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      const Vec3 f0 = prep->plan.steps[i].force_dir;
      const Vec3 f = p.steps[i].force_dir;
      CHECK(p.steps[i].motion_dir == prep->plan.steps[i].motion_dir);
      if (f0.norm() == 0.0) {
        CHECK(f.norm() == 0.0);
        continue;
      }
      ++total;
      if (f.norm() == 0.0) {
        ++zero;
        continue;
      }
      const double angle = std::atan2(f0.cross(f).norm(), f0.dot(f));
      CHECK(geometry::rad_to_deg(angle) == doctest::Approx(60.0).epsilon(1e-9));
    }
  }
  CHECK(static_cast<double>(zero) / total == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("zero trials give empty lists") {
  ScenarioConfig c = open_scenario("lock1");
  c.trials = 0;
  CHECK(run_open_trials(c, Method::kAugmented, shared_cache()).empty());
  CHECK(run_grasp_trials(c, Method::kAugmented, shared_cache()).empty());
  CHECK(run_full_task(c, Method::kAugmented, shared_cache()).empty());
  c.trials = -2;
  CHECK(code_of([&] { run_open_trials(c, Method::kAugmented, shared_cache()); }) == ErrorCode::kConfigError);
}

TEST_CASE("open trials: augmented succeeds, baseline fails at the gate") {
  ScenarioConfig c = open_scenario("lock1");
  c.trials = 6;
  c.seed = 11;
  const auto aug = run_open_trials(c, Method::kAugmented, shared_cache());
  REQUIRE(aug.size() == 6);
  for (const TrialResult& r : aug) {
    CHECK(r.success);
    CHECK(r.failure_reason.empty());
    CHECK(r.open_duration > 0.0);
    CHECK(r.phase_switches >= 1);
  }
  const auto base = run_open_trials(c, Method::kBaseline, shared_cache());
  int failures = 0;
  for (const TrialResult& r : base) {
    if (r.success) continue;
    ++failures;
    CHECK(r.gate_phase_failure);
  }
  CHECK(failures >= 1);
}

TEST_CASE("trials are deterministic under a fixed seed") {
  ScenarioConfig c = grasp_scenario("lock2");
  c.trials = 2;
  c.seed = 99;
  const auto a = run_grasp_trials(c, Method::kAugmented, shared_cache());
  const auto b = run_grasp_trials(c, Method::kAugmented, shared_cache());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(trial_to_json(a[i]).dump() == trial_to_json(b[i]).dump());
}

TEST_CASE("grasp trials with a mid-approach pose change") {
  ScenarioConfig c = grasp_scenario("lock1");
  c.trials = 4;
  c.seed = 21;
  for (const TrialResult& r : run_grasp_trials(c, Method::kAugmented, shared_cache())) {
    CHECK_MESSAGE(r.success, r.failure_reason);
    CHECK(r.grasp_position_error <= 0.005);
    CHECK(r.grasp_yaw_error <= geometry::deg_to_rad(8.0));
  }
  int demo_only = 0;
  for (const TrialResult& r : run_grasp_trials(c, Method::kBaseline, shared_cache())) demo_only += r.success;
  CHECK(demo_only <= 1);
}

TEST_CASE("drawer plan transfers to the second drawer with one phase switch") {
  ScenarioConfig c = open_scenario("drawer_b");
  c.plan_fixture = "drawer_a";
  c.trials = 5;
  c.seed = 4;
  for (const TrialResult& r : run_open_trials(c, Method::kAugmented, shared_cache())) {
    CHECK_MESSAGE(r.success, r.failure_reason);
    CHECK(r.phase_switches == 1);
  }
}

TEST_CASE("full task searches when the knob starts out of view") {
  ScenarioConfig c = full_task_scenario("lock1");
  c.start_out_of_view = true;
  c.trials = 2;
  c.seed = 3;
  for (const TrialResult& r : run_full_task(c, Method::kAugmented, shared_cache())) {
    CHECK_MESSAGE(r.success, r.failure_reason);
    CHECK(r.grasp_success);
    CHECK(r.open_success);
    CHECK(r.search_waypoints > 0);
  }
}

TEST_CASE("run_suite and report files are byte-identical across runs") {
  SuiteConfig s;
  s.name = "mini";
  s.seed = 5;
  for (Method m : {Method::kAugmented, Method::kBaseline}) {
    SuiteEntry e;
    e.task = Task::kOpen;
    e.method = m;
    e.scenario = open_scenario("lock2");
    e.scenario.trials = 3;
    e.scenario.seed = 17;
    s.entries.push_back(e);
  }
  const fs::path a = scratch_dir("report_a");
  const fs::path b = scratch_dir("report_b");
  {
    PrepCache cache;
    const auto rs = run_suite(s, cache);
    CHECK(rs.size() == 6);
    write_report(a.string(), report_table(rs, s), rs);
  }
  {
    PrepCache cache;
    const auto rs = run_suite(s, cache);
    write_report(b.string(), report_table(rs, s), rs);
  }
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "table.txt") == slurp(b / "table.txt"));
  const json doc = json::parse(slurp(a / "report.json"));
  CHECK(doc["trials"].size() == 6);
  CHECK(doc["config"]["name"] == "mini");
}

TEST_CASE("api: session scene and demonstration") {
  Api api;
  auto c = api.client();
  const json created = post(c, "/sessions", {{"fixture", "lock1"}}, 201);
  const std::string sid = created["id"];
  const json scene = get(c, "/sessions/" + sid + "/scene");
  CHECK(scene["mechanism"]["name"] == "lock1");
  CHECK(scene["state"]["q"].size() == 3);
  CHECK(scene["sketch_plane"] == "xz");
  CHECK_FALSE(scene["has_demonstration"].get<bool>());

  const json demo_doc = l_shaped_demo();
  const json summary = post(c, "/sessions/" + sid + "/demonstration", demo_doc, 200);
  CHECK(summary["k"] == 2);
  // Equals the library's segmentation of the same document.
  const auto segs = demo::segment_trajectory(demo::demo_from_json(demo_doc));
  CHECK(summary["segments"] == demo::segmentation_summary(segs)["segments"]);

  const json reseg = post(c, "/sessions/" + sid + "/segment", {{"min_length", 0.01}}, 200);
  CHECK(reseg["k"] == 2);
}

TEST_CASE("api: structured errors") {
  Api api;
  auto c = api.client();
  json e = get(c, "/sessions/nope/scene", 404);
  CHECK(e["error"]["code"] == "NotFound");
  e = post(c, "/sessions", {{"fixture", "safe9"}}, 404);
  CHECK(e["error"]["code"] == "NotFound");
  const std::string sid = post(c, "/sessions", json::object(), 201)["id"];
  e = post(c, "/sessions/" + sid + "/augment", json::object(), 409);
  CHECK(e["error"]["code"] == "Conflict");
  e = post(c, "/sessions/" + sid + "/execute", json::object(), 409);
  CHECK(e["error"]["code"] == "Conflict");
  // Sub-5 mm scribble.
  demo::DemoTrajectory tiny;
  for (int i = 0; i < 5; ++i) {
    demo::DemoSample s;
    s.t = 0.01 * i;
    s.ee_pose = geometry::Pose::from_translation(Vec3(0.5 + 0.0005 * i, 0, 0.1));
    tiny.samples.push_back(s);
  }
  e = post(c, "/sessions/" + sid + "/demonstration", demo::demo_to_json(tiny), 422);
  CHECK(e["error"]["code"] == "DegenerateTrajectory");
  e = post(c, "/sessions/" + sid + "/demonstration", {{"samples", "many"}}, 400);
  CHECK(e["error"]["code"] == "SchemaError");
  auto raw = c.Post(("/sessions/" + sid + "/demonstration").c_str(), "{not json", "application/json");
  REQUIRE(raw);
  CHECK(raw->status == 400);
  CHECK(json::parse(raw->body)["error"]["code"] == "SchemaError");
  e = get(c, "/sessions/" + sid + "/runs/r9/frames", 404);
  CHECK(e["error"]["code"] == "NotFound");
}

TEST_CASE("api: augment then execute with paged frames") {
  Api api;
  auto c = api.client();
  const std::string sid = post(c, "/sessions", {{"fixture", "lock1"}}, 201)["id"];
  post(c, "/sessions/" + sid + "/demonstration", {{"scripted", true}}, 200);
  const json started = post(c, "/sessions/" + sid + "/augment", json::object(), 202);
  const std::string rid = started["run_id"];
  std::vector<json> frames;
  const json last = poll_run(c, sid, rid, frames);
  CHECK(last["status"] == "succeeded");
  REQUIRE_FALSE(frames.empty());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i]["index"] == i);
    if (i > 0) CHECK(frames[i]["t"].get<double>() > frames[i - 1]["t"].get<double>());
  }
  CHECK(frames.front().contains("ee_pose"));
  CHECK(frames.front()["wrench"].size() == 6);
  const json hyp = get(c, "/sessions/" + sid + "/runs/" + rid + "/hypotheses");
  REQUIRE_FALSE(hyp["hypotheses"].empty());
  CHECK(hyp["hypotheses"][0]["segment"] == 1);
  // Same verdicts as the plan in the run result.
  std::size_t n = 0;
  for (const json& step : last["result"]["steps"]) n += step["evaluations"].size();
  CHECK(hyp["hypotheses"].size() == n);
  CHECK(get(c, "/sessions/" + sid + "/scene")["has_plan"].get<bool>());

  const std::string xid = post(c, "/sessions/" + sid + "/execute", json::object(), 202)["run_id"];
  CHECK(xid != rid);
  std::vector<json> xframes;
  const json xlast = poll_run(c, sid, xid, xframes);
  CHECK(xlast["status"] == "succeeded");
  CHECK(xlast["result"]["success"].get<bool>());
  CHECK(xlast["result"]["switches"].size() >= 1);
  CHECK(xframes.back()["phase"].get<int>() >= 1);
  CHECK(get(c, "/sessions/" + sid + "/scene")["state"]["goal_satisfied"].get<bool>());

  // Paging past the end is an error; a page at the end is empty and terminal.
  const json end = get(c, "/sessions/" + sid + "/runs/" + xid + "/frames?from=" + std::to_string(xframes.size()));
  CHECK(end["frames"].empty());
  CHECK(end["terminal"].get<bool>());
  get(c, "/sessions/" + sid + "/runs/" + xid + "/frames?from=" + std::to_string(xframes.size() + 1), 400);
  get(c, "/sessions/" + sid + "/runs/" + xid + "/frames?from=-3", 400);
  const json small = get(c, "/sessions/" + sid + "/runs/" + xid + "/frames?from=2&limit=3");
  CHECK(small["frames"].size() == 3);
  CHECK(small["frames"][0]["index"] == 2);
  CHECK(small["next"] == 5);
}

TEST_CASE("api: interleaved sessions stay isolated") {
  Api api;
  struct Outcome {
    std::string sid;
    json scene;
    json summary;
    json result;
  };
  auto client_script = [&](const std::string& fixture, Outcome& out) {
    auto c = api.client();
    out.sid = post(c, "/sessions", {{"fixture", fixture}}, 201)["id"];
    for (int i = 0; i < 3; ++i) {
      out.summary = post(c, "/sessions/" + out.sid + "/demonstration", {{"scripted", true}}, 200);
      get(c, "/sessions/" + out.sid + "/scene");
    }
    const std::string rid = post(c, "/sessions/" + out.sid + "/augment", json::object(), 202)["run_id"];
    std::vector<json> frames;
    poll_run(c, out.sid, rid, frames);
    const std::string xid = post(c, "/sessions/" + out.sid + "/execute", json::object(), 202)["run_id"];
    out.result = poll_run(c, out.sid, xid, frames)["result"];
    out.scene = get(c, "/sessions/" + out.sid + "/scene");
  };
  Outcome lock;
  Outcome drawer;
  std::thread a([&] { client_script("lock1", lock); });
  std::thread b([&] { client_script("drawer_a", drawer); });
  a.join();
  b.join();
  CHECK(lock.sid != drawer.sid);
  CHECK(lock.scene["mechanism"]["name"] == "lock1");
  CHECK(drawer.scene["mechanism"]["name"] == "drawer_a");
  CHECK(lock.summary["k"] == 4);
  CHECK(drawer.summary["k"] == 2);
  CHECK(lock.result["success"].get<bool>());
  CHECK(drawer.result["success"].get<bool>());
  CHECK(lock.scene["runs"].size() == 2);
  CHECK(drawer.scene["runs"].size() == 2);
  // The same commands on a fresh single session reproduce each outcome.
  Outcome solo;
  client_script("drawer_a", solo);
  CHECK(solo.summary == drawer.summary);
  CHECK(solo.result == drawer.result);
}

TEST_CASE("api: binding a taken port is a BindError") {
  Service first;
  const int port = first.bind("127.0.0.1", 0);
  Service second;
  CHECK(code_of([&] { second.bind("127.0.0.1", port); }) == ErrorCode::kBindError);
  CHECK(code_of([&] { second.bind("127.0.0.1", 70000); }) == ErrorCode::kBindError);
}
