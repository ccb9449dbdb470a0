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

// Command-line front end: scripted demos, augmentation, dataset collection,
// estimator fitting, experiment suites and the local UI service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlfd/common/error.hpp"
#include "mlfd/demo/augment.hpp"
#include "mlfd/demo/dataset.hpp"
#include "mlfd/demo/segmentation.hpp"
#include "mlfd/demo/serialize.hpp"
#include "mlfd/demo/trajectory.hpp"
#include "mlfd/harness/config.hpp"
#include "mlfd/harness/experiment.hpp"
#include "mlfd/harness/report.hpp"
#include "mlfd/harness/service.hpp"
#include "mlfd/mechanism/loader.hpp"
#include "mlfd/perception/scene.hpp"

namespace {

using namespace mlfd;
using nlohmann::json;

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

demo::DemoTrajectory read_demo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path + ": " + e.what());
  }
  return demo::demo_from_json(doc);
}

mechanism::MechanismModel read_mechanism(const std::string& fixture) {
  if (std::filesystem::exists(fixture)) return mechanism::load_mechanism_file(fixture);
  return mechanism::bundled_mechanism(fixture);
}

harness::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kBindError: return 3;
    case ErrorCode::kIoError: return 4;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning mechanism manipulation from one demonstration"};
  app.require_subcommand(1);

  std::string fixture = "lock1";
  std::string demo_path;
  std::string out;

  auto* demo_cmd = app.add_subcommand("demo", "Write the scripted demonstration of a fixture");
  demo_cmd->add_option("--fixture", fixture, "Bundled fixture name or mechanism file")->capture_default_str();
  demo_cmd->add_option("--out", out, "Output trajectory (JSON)")->required();

  auto* augment_cmd = app.add_subcommand("augment", "Segment a demonstration and augment it with contact forces");
  augment_cmd->add_option("--demo", demo_path, "Demonstration trajectory")->required()->check(CLI::ExistingFile);
  augment_cmd->add_option("--fixture", fixture, "Mechanism the demonstration was given on")->capture_default_str();
  augment_cmd->add_option("--out", out, "Output plan (JSON)")->required();

  std::string funnel = "default";
  auto* collect_cmd = app.add_subcommand("collect", "Render and label grasp views into a dataset directory");
  collect_cmd->add_option("--demo", demo_path, "Demonstration trajectory")->required()->check(CLI::ExistingFile);
  collect_cmd->add_option("--fixture", fixture, "Mechanism to render")->capture_default_str();
  collect_cmd->add_option("--funnel", funnel, "'default' funnel or 'approach' (demonstration views only)")
      ->check(CLI::IsMember({"default", "approach"}))
      ->capture_default_str();
  collect_cmd->add_option("--out", out, "Dataset directory")->required();

  std::string dataset_dir;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the target detector and yaw estimator from a dataset");
  fit_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  fit_cmd->add_option("--out", out, "Estimator file")->required();

  std::string suite = "table1";
  std::uint64_t seed = 7;
  int trials = 10;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment suite and write report.json and table.txt");
  run_cmd->add_option("--suite", suite, "'table1' or a suite file (JSON)")->capture_default_str();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Master seed for the table1 suite")->capture_default_str();
  run_cmd->add_option("--trials", trials, "Trials per condition for the table1 suite")
      ->check(CLI::Range(0, 1000))
      ->capture_default_str();
  run_cmd->add_option("--out", out, "Report directory")->required();

  auto* suite_cmd = app.add_subcommand("suite", "Write the table1 suite configuration as an editable file");
  suite_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  suite_cmd->add_option("--trials", trials, "Trials per condition")->check(CLI::Range(0, 1000))->capture_default_str();
  suite_cmd->add_option("--out", out, "Suite file (JSON)")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP+JSON API for the sketching UI");
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port, 0 picks a free one")->check(CLI::Range(0, 65535))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo_cmd) {
      const auto model = read_mechanism(fixture);
      write_json(out, demo::demo_to_json(demo::scripted_demo(model)));
      std::cout << "wrote " << out << '\n';
    } else if (*augment_cmd) {
      const auto model = std::make_shared<const mechanism::MechanismModel>(read_mechanism(fixture));
      const demo::DemoTrajectory d = read_demo(demo_path);
      const auto segments = demo::segment_trajectory(d);
      mechanism::Episode ep(model, model->zero_configuration());
      const demo::AugmentedPlan plan = demo::augment_contact(ep, segments);
      write_json(out, demo::plan_to_json(plan));
      std::cout << segments.size() << " segments\n";
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& s = plan.steps[i];
        std::cout << "  " << i + 1 << ": m = [" << s.motion_dir.transpose() << "]  f = [" << s.force_dir.transpose()
                  << "]  (" << demo::to_string(s.source) << ")\n";
      }
      for (const std::string& w : plan.warnings) std::cout << "warning: " << w << '\n';
      std::cout << "wrote " << out << '\n';
    } else if (*collect_cmd) {
      const auto model = read_mechanism(fixture);
      const demo::DemoTrajectory d = read_demo(demo_path);
      const auto cam = geometry::CameraModel::standard();
      const geometry::Pose grasp = d.grasp_pose();
      const perception::Scene scene = perception::scene_for_mechanism(model, grasp);
      const double width = model.appearance.object_width;
      const auto poses = funnel == "default" ? demo::generate_funnel_poses(grasp, demo::FunnelPlan::standard())
                                             : demo::approach_poses(d, 50);
      demo::LabelOptions opts;
      opts.out_dir = out;
      demo::GraspDataset ds = demo::generate_grasp_labels(poses, grasp, cam, width, scene, opts);
      ds.hue = demo::fit_hue_from_demo(d, scene, cam, width);
      ds.has_hue = true;
      demo::write_dataset_meta(out, ds);
      std::cout << ds.records.size() << " labeled views, " << ds.dropped << " dropped; wrote " << out << '\n';
    } else if (*fit_cmd) {
      const demo::GraspDataset ds = demo::load_grasp_dataset(dataset_dir);
      demo::fit_target_estimator(ds).save(out);
      std::cout << ds.records.size() << " views indexed; wrote " << out << '\n';
    } else if (*run_cmd) {
      harness::SuiteConfig cfg;
      if (suite == "table1") {
        cfg = harness::table1_suite(seed, trials);
      } else {
        cfg = harness::load_suite_file(suite);
        if (*seed_opt) throw Error(ErrorCode::kConfigError, "--seed applies to the table1 suite; suite files carry their seeds");
      }
      harness::PrepCache cache;
      const auto results = harness::run_suite(cfg, cache);
      const harness::ExperimentReport rep = harness::report_table(results, cfg);
      harness::write_report(out, rep, results);
      std::cout << harness::render_table(rep) << "wrote " << out << '\n';
    } else if (*suite_cmd) {
      write_json(out, harness::suite_to_json(harness::table1_suite(seed, trials)));
      std::cout << "wrote " << out << '\n';
    } else if (*serve_cmd) {
      harness::Service service;
      const int bound = service.bind(host, port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ':' << bound << std::endl;
      service.serve();
      g_service = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
