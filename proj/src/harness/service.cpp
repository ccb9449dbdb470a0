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

#include "mlfd/harness/service.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "mlfd/common/error.hpp"
#include "mlfd/control/sequencer.hpp"
#include "mlfd/demo/augment.hpp"
#include "mlfd/demo/segmentation.hpp"
#include "mlfd/demo/serialize.hpp"
#include "mlfd/demo/trajectory.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"
#include "mlfd/mechanism/simulator.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace mlfd::harness {

using nlohmann::json;
using mechanism::MechanismModel;

namespace {

constexpr std::size_t kDefaultPage = 500;
constexpr std::size_t kMaxPage = 5000;
constexpr double kWorkspaceMargin = 0.3;  // m around the handle

// A request the session state cannot serve yet (e.g. augment before a demonstration).
struct Conflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchemaError:
    case ErrorCode::kConfigError:
    case ErrorCode::kOutOfRange: return 400;
    default: return 422;
  }
}

json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

json vec_json(const geometry::Vec3& v) { return {v.x(), v.y(), v.z()}; }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json contact_json(const mechanism::Episode& ep, mechanism::ContactChange event) {
  json blocked = json::array();
  for (const mechanism::JointBlock& b : ep.last_report().blocked) blocked.push_back({b.lower, b.upper});
  return {{"attached", ep.state().attached}, {"blocked", blocked}, {"event", mechanism::to_string(event)}};
}

json frame_json(const mechanism::Episode& ep, double t, int phase, mechanism::ContactChange event) {
  return {{"t", t},
          {"q", vector_json(ep.state().q)},
          {"ee_pose", mechanism::pose_to_json(ep.state().ee_pose)},
          {"wrench", vector_json(ep.last_report().wrench)},
          {"phase", phase},
          {"contact", contact_json(ep, event)}};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("malformed JSON: ") + e.what());
  }
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps exceptions to structured error responses.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(std::string(to_string(e.code())), e.what()));
    } catch (const Conflict& e) {
      send(res, 409, error_body("Conflict", e.what()));
    } catch (const json::exception& e) {
      send(res, 400, error_body("SchemaError", e.what()));
    } catch (const std::exception& e) {
      send(res, 500, error_body("Internal", e.what()));
    }
  };
}

double number_or(const json& body, const char* key, double fallback) {
  if (!body.contains(key)) return fallback;
  if (!body[key].is_number()) throw Error(ErrorCode::kSchemaError, std::string(key) + " must be a number");
  return body[key].get<double>();
}

std::size_t query_index(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string s = req.get_param_value(key);
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      s.size() > 9) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(std::stoul(s));
}

}  // namespace

struct Run {
  std::string id;
  std::string kind;  // "augment" or "execute"
  std::mutex mu;
  std::vector<json> frames;
  std::vector<json> hypotheses;
  std::string status = "running";  // running, succeeded, failed
  json result;
  std::thread worker;

  void push_frame(json f) {
    std::lock_guard<std::mutex> lock(mu);
    f["index"] = frames.size();
    frames.push_back(std::move(f));
  }
  void finish(const std::string& s, json r) {
    std::lock_guard<std::mutex> lock(mu);
    status = s;
    result = std::move(r);
  }
};

struct Session {
  std::string id;
  std::mutex mu;  // serializes commands
  std::shared_ptr<const MechanismModel> model;
  mechanism::JointVector q;
  std::optional<demo::DemoTrajectory> demo;
  std::vector<demo::Segment> segments;
  std::optional<demo::AugmentedPlan> plan;
  std::vector<std::shared_ptr<Run>> runs;

  std::shared_ptr<Run> find_run(const std::string& rid) {
    std::lock_guard<std::mutex> lock(mu);
    for (const auto& r : runs) {
      if (r->id == rid) return r;
    }
    throw Error(ErrorCode::kNotFound, "unknown run '" + rid + "'");
  }
  std::shared_ptr<Run> new_run(const std::string& kind) {
    auto run = std::make_shared<Run>();
    run->id = "r" + std::to_string(runs.size() + 1);
    run->kind = kind;
    runs.push_back(run);
    return run;
  }
};

namespace {

json scene_json(const Session& s) {
  const MechanismModel& m = *s.model;
  const geometry::Pose grasp = mechanism::forward_kinematics(m, m.zero_configuration());
  const geometry::Vec3 c = grasp.translation();
  const geometry::Vec3 d = geometry::Vec3::Constant(kWorkspaceMargin);
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back({{"id", r->id}, {"kind", r->kind}});
  return {{"id", s.id},
          {"mechanism", mechanism::mechanism_to_json(m)},
          {"state",
           {{"q", vector_json(s.q)},
            {"ee_pose", mechanism::pose_to_json(mechanism::forward_kinematics(m, s.q))},
            {"goal_satisfied", m.goal_satisfied(s.q)}}},
          {"grasp_pose", mechanism::pose_to_json(grasp)},
          {"sketch_plane", m.sketch_plane},
          {"workspace", {{"min", vec_json(c - d)}, {"max", vec_json(c + d)}}},
          {"has_demonstration", s.demo.has_value()},
          {"segments", s.segments.size()},
          {"has_plan", s.plan.has_value()},
          {"runs", runs}};
}

json run_page(Run& run, std::size_t from, std::size_t limit) {
  std::lock_guard<std::mutex> lock(run.mu);
  const std::size_t total = run.frames.size();
  if (from > total) throw Error(ErrorCode::kOutOfRange, "from beyond the last frame");
  const std::size_t end = std::min(total, from + limit);
  json frames = json::array();
  for (std::size_t i = from; i < end; ++i) frames.push_back(run.frames[i]);
  const bool terminal = run.status != "running";
  json page = {{"run_id", run.id},  {"kind", run.kind}, {"status", run.status},
               {"terminal", terminal && end == total}, {"from", from}, {"next", end},
               {"total", total}, {"frames", frames}};
  if (terminal) page["result"] = run.result;
  return page;
}

json error_result(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  return error_body(err ? std::string(to_string(err->code())) : "Internal", e.what());
}

}  // namespace

Service::Service() : server_(std::make_unique<httplib::Server>()) {
  // The library default adds SO_REUSEPORT, which would let a second service
  // share the port silently instead of failing to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kBindError, "port out of range");
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw Error(ErrorCode::kBindError, "cannot bind " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kBindError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::serve() { server_->listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  const int p = bind(host, port);
  serve_thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return p;
}

void Service::stop() {
  server_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
  std::vector<std::shared_ptr<Run>> runs;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& [id, s] : sessions_) {
      std::lock_guard<std::mutex> slock(s->mu);
      runs.insert(runs.end(), s->runs.begin(), s->runs.end());
    }
  }
  for (auto& r : runs) {
    if (r->worker.joinable()) r->worker.join();
  }
}

std::shared_ptr<Session> Service::find_session(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

void Service::install_routes() {
  httplib::Server& srv = *server_;

  srv.Get("/fixtures", guarded([](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"fixtures", mechanism::bundled_mechanism_names()}});
  }));

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    auto s = std::make_shared<Session>();
    if (body.contains("mechanism")) {
      s->model = std::make_shared<const MechanismModel>(mechanism::load_mechanism_json(body["mechanism"]));
    } else {
      std::string fixture = "lock1";
      if (body.contains("fixture")) {
        if (!body["fixture"].is_string()) throw Error(ErrorCode::kSchemaError, "fixture must be a string");
        fixture = body["fixture"].get<std::string>();
      }
      s->model = std::make_shared<const MechanismModel>(mechanism::bundled_mechanism(fixture));
    }
    s->q = s->model->zero_configuration();
    {
      std::lock_guard<std::mutex> lock(mu_);
      s->id = "s" + std::to_string(next_session_++);
      sessions_[s->id] = s;
    }
    send(res, 201, {{"id", s->id}, {"fixture", s->model->name}, {"dof", s->model->dof()}});
  }));

  srv.Get(R"(/sessions/([^/]+)/scene)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find_session(req.matches[1]);
    std::lock_guard<std::mutex> lock(s->mu);
    send(res, 200, scene_json(*s));
  }));

  srv.Post(R"(/sessions/([^/]+)/demonstration)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find_session(req.matches[1]);
    const json body = parse_body(req);
    std::lock_guard<std::mutex> lock(s->mu);
    demo::DemoTrajectory d = body.value("scripted", false) ? demo::scripted_demo(*s->model)
                                                           : demo::demo_from_json(body);
    std::vector<demo::Segment> segs = demo::segment_trajectory(d);
    s->demo = std::move(d);
    s->segments = std::move(segs);
    s->plan.reset();
    json out = demo::segmentation_summary(s->segments);
    out["samples"] = s->demo->samples.size();
    out["grasp_index"] = s->demo->resolved_grasp_index();
    send(res, 200, out);
  }));

  srv.Post(R"(/sessions/([^/]+)/segment)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find_session(req.matches[1]);
    const json body = parse_body(req);
    std::lock_guard<std::mutex> lock(s->mu);
    if (!s->demo) throw Conflict("no demonstration in this session");
    demo::SegmentationParams p;
    p.angle_threshold = geometry::deg_to_rad(number_or(body, "angle_threshold_deg", geometry::rad_to_deg(p.angle_threshold)));
    p.window = static_cast<int>(number_or(body, "window", p.window));
    p.min_length = number_or(body, "min_length", p.min_length);
    p.spacing = number_or(body, "spacing", p.spacing);
    if (p.window < 1 || p.min_length <= 0.0 || p.spacing <= 0.0 || p.angle_threshold <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "segmentation parameters must be positive");
    }
    s->segments = demo::segment_trajectory(*s->demo, p);
    s->plan.reset();
    send(res, 200, demo::segmentation_summary(s->segments));
  }));

  srv.Post(R"(/sessions/([^/]+)/augment)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find_session(req.matches[1]);
    std::lock_guard<std::mutex> lock(s->mu);
    if (s->segments.empty()) throw Conflict("no segmentation in this session");
    auto run = s->new_run("augment");
    const auto segments = s->segments;
    const auto model = s->model;
    run->worker = std::thread([s, run, segments, model] {
      try {
        mechanism::Episode ep(model, model->zero_configuration());
        int phase = 0;
        ep.set_observer([&](const mechanism::Episode& e) {
          run->push_frame(frame_json(e, e.time(), phase, e.last_report().contact_change));
        });
        demo::AugmentParams params;
        params.on_candidate = [&](int segment, const demo::ForceCandidate&) { phase = segment; };
        params.on_result = [&](const demo::ForceHypothesisResult& r) {
          std::lock_guard<std::mutex> lock(run->mu);
          run->hypotheses.push_back(demo::hypothesis_result_to_json(r));
        };
        demo::AugmentedPlan plan = demo::augment_contact(ep, segments, params);
        json out = demo::plan_to_json(plan);
        {
          std::lock_guard<std::mutex> lock(s->mu);
          s->plan = std::move(plan);
        }
        run->finish("succeeded", out);
      } catch (const std::exception& e) {
        run->finish("failed", error_result(e));
      }
    });
    send(res, 202, {{"run_id", run->id}, {"kind", run->kind}});
  }));

  srv.Post(R"(/sessions/([^/]+)/execute)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find_session(req.matches[1]);
    const json body = parse_body(req);
    const std::string which = body.value("plan", std::string("augmented"));
    const double noise = number_or(body, "wrench_noise", 0.0);
    const double timeout = number_or(body, "timeout", 60.0);
    const double seed = number_or(body, "seed", 0.0);
    if (noise < 0.0 || timeout <= 0.0 || seed < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "wrench_noise, timeout and seed must be non-negative");
    }
    std::lock_guard<std::mutex> lock(s->mu);
    demo::AugmentedPlan plan;
    if (which == "augmented") {
      if (!s->plan) throw Conflict("no augmented plan in this session");
      plan = *s->plan;
    } else if (which == "motion_only") {
      if (s->segments.empty()) throw Conflict("no segmentation in this session");
      plan = demo::motion_only_plan(s->segments, s->demo->grasp_pose());
    } else {
      throw Error(ErrorCode::kInvalidArgument, "plan must be 'augmented' or 'motion_only'");
    }
    auto run = s->new_run("execute");
    const auto model = s->model;
    run->worker = std::thread([s, run, model, plan, noise, timeout, seed] {
      try {
        mechanism::Episode ep(model, model->zero_configuration());
        ep.set_sensor_noise(noise, static_cast<std::uint64_t>(seed));
        const geometry::Pose grasp = ep.state().ee_pose;
        const control::SequencerSpec spec = demo::plan_to_sequencer(plan, grasp, {}, timeout);
        control::SequencerOptions opts;
        opts.record_trace = false;
        opts.on_frame = [&](const control::TraceFrame& f) {
          run->push_frame(frame_json(ep, f.t, f.phase, f.event));
        };
        const control::SequencerResult r = control::run_sequencer(spec, ep, opts);
        json switches = json::array();
        for (const control::PhaseSwitch& sw : r.switches) {
          switches.push_back({{"from", sw.from}, {"to", sw.to}, {"t", sw.t}, {"cause", mechanism::to_string(sw.cause)}});
        }
        {
          std::lock_guard<std::mutex> lock(s->mu);
          s->q = ep.state().q;
        }
        run->finish(r.success ? "succeeded" : "failed",
                    {{"success", r.success},
                     {"reason", r.reason},
                     {"duration", r.duration},
                     {"final_phase", r.final_phase},
                     {"switches", switches}});
      } catch (const std::exception& e) {
        run->finish("failed", error_result(e));
      }
    });
    send(res, 202, {{"run_id", run->id}, {"kind", run->kind}});
  }));

  srv.Get(R"(/sessions/([^/]+)/runs/([^/]+)/frames)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto run = find_session(req.matches[1])->find_run(req.matches[2]);
    const std::size_t from = query_index(req, "from", 0);
    const std::size_t limit = query_index(req, "limit", kDefaultPage);
    if (limit == 0 || limit > kMaxPage) {
      throw Error(ErrorCode::kInvalidArgument, "limit must be in [1, " + std::to_string(kMaxPage) + "]");
    }
    send(res, 200, run_page(*run, from, limit));
  }));

  srv.Get(R"(/sessions/([^/]+)/runs/([^/]+)/hypotheses)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto run = find_session(req.matches[1])->find_run(req.matches[2]);
    std::lock_guard<std::mutex> lock(run->mu);
    send(res, 200, {{"run_id", run->id}, {"status", run->status}, {"hypotheses", run->hypotheses}});
  }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send(res, res.status, error_body(res.status == 404 ? "NotFound" : "HttpError", "request failed"));
    }
  });
}

}  // namespace mlfd::harness
