/* Copyright 2026 The hilo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hilo/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

// Eigen must come before httplib: <resolv.h> defines a `_res` macro.
#include "hilo/dataset.hpp"
#include "hilo/engine.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace hilo {

using nlohmann::json;

int port_from_env(int fallback) {
  const char* v = std::getenv("HILO_PORT");
  if (v == nullptr || *v == '\0') return fallback;
  try {
    const int p = std::stoi(v);
    if (p > 0 && p < 65536) return p;
  } catch (const std::exception&) {
  }
  return fallback;
}

namespace {

json error_body(const std::string& code, const std::string& field, const std::string& message) {
  return json{{"code", code}, {"field", field}, {"message", message}};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& field,
          const std::string& message) {
  reply(res, status, error_body(code, field, message));
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const json::parse_error& e) {
    fail(res, 400, "invalid_json", "", e.what());
    return std::nullopt;
  }
}

struct Dataset {
  std::shared_ptr<const std::vector<Scene>> scenes;
  json summary;
};

struct Experiment {
  std::string id;
  std::shared_ptr<Engine> engine;
};

json dataset_summary(const std::string& id, const std::vector<Scene>& scenes) {
  std::size_t frames = 0, objects = 0;
  for (const Scene& s : scenes) {
    frames += s.frames.size();
    for (const Frame& f : s.frames) objects += f.objects.size();
  }
  return json{{"dataset_id", id}, {"scenes", scenes.size()}, {"frames", frames}, {"objects", objects}};
}

}  // namespace

struct Gateway::Impl {
  GatewayOptions opts;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  std::mutex mu;
  std::map<std::string, Dataset> datasets;
  std::map<std::string, Experiment> experiments;
  int next_dataset = 1;
  int next_experiment = 1;

  explicit Impl(GatewayOptions o) : opts(std::move(o)) { routes(); }

  std::shared_ptr<Engine> find(const std::string& id, httplib::Response& res) {
    std::lock_guard lock(mu);
    auto it = experiments.find(id);
    if (it == experiments.end()) {
      fail(res, 404, "not_found", "experiment_id", "unknown experiment " + id);
      return nullptr;
    }
    return it->second.engine;
  }

  // Task ids are global on the wire: "<experiment>-<local id>".
  static json task_json(const std::string& exp, const AnnotationTask& t) { return task_wire(exp, to_json(t)); }

  json status(const std::string& id, const Engine& e) {
    const auto c = e.conservation();
    return json{{"experiment_id", id},
                {"strategy", to_string(e.config().strategy)},
                {"mode", e.config().mode == ExperimentConfig::Mode::live ? "live" : "batch"},
                {"finished", e.finished()},
                {"paused", e.paused()},
                {"sim_time_s", us_to_seconds(e.now_us())},
                {"policy", e.policy()},
                {"chunks", {{"scheduled", c.scheduled}, {"completed", c.completed}}}};
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string msg = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        msg = e.what();
      } catch (...) {
      }
      fail(res, 500, "internal", "", msg);
    });

    server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) { post_dataset(req, res); });
    server.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      json out = json::array();
      for (const auto& [id, d] : datasets) out.push_back(d.summary);
      reply(res, 200, out);
    });
    server.Post("/experiments",
                [this](const httplib::Request& req, httplib::Response& res) { post_experiment(req, res); });
    server.Get("/experiments", [this](const httplib::Request&, httplib::Response& res) {
      std::vector<std::pair<std::string, std::shared_ptr<Engine>>> all;
      {
        std::lock_guard lock(mu);
        for (const auto& [id, e] : experiments) all.emplace_back(id, e.engine);
      }
      json out = json::array();
      for (const auto& [id, e] : all) out.push_back(status(id, *e));
      reply(res, 200, out);
    });
    server.Get("/experiments/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      if (auto e = find(id, res)) reply(res, 200, status(id, *e));
    });
    server.Get("/experiments/:id/metrics", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto e = find(req.path_params.at("id"), res)) reply(res, 200, to_json(e->metrics()));
    });
    server.Get("/experiments/:id/traces", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.path_params.at("id"), res);
      if (!e) return;
      std::ostringstream out;
      for (const ProtocolTrace& t : e->traces()) out << to_json(t).dump() << '\n';
      res.set_content(out.str(), "application/x-ndjson");
    });
    server.Get("/experiments/:id/monitor", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.path_params.at("id"), res);
      if (!e) return;
      json out = json::array();
      for (const MonitorSample& s : e->monitor_samples()) out.push_back(to_json(s));
      reply(res, 200, out);
    });
    server.Get("/experiments/:id/events",
               [this](const httplib::Request& req, httplib::Response& res) { get_events(req, res); });
    server.Get("/experiments/:id/annotations/next", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      auto e = find(id, res);
      if (!e) return;
      auto task = e->next_task();
      if (!task) {
        res.status = 204;
        return;
      }
      reply(res, 200, task_json(id, *task));
    });
    // Any experiment's next task, oldest experiment first.
    server.Get("/annotations/next", [this](const httplib::Request&, httplib::Response& res) {
      std::vector<std::pair<int, Experiment>> all;
      {
        std::lock_guard lock(mu);
        for (const auto& [id, x] : experiments) all.emplace_back(std::stoi(id.substr(1)), x);
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [n, x] : all) {
        if (auto task = x.engine->next_task()) {
          reply(res, 200, task_json(x.id, *task));
          return;
        }
      }
      res.status = 204;
    });
    server.Post("/annotations/:task_id",
                [this](const httplib::Request& req, httplib::Response& res) { post_annotation(req, res, false); });
    server.Post("/annotations/:task_id/dismiss",
                [this](const httplib::Request& req, httplib::Response& res) { post_annotation(req, res, true); });
    server.Get("/experiments/:id/learner", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.path_params.at("id"), res);
      if (!e) return;
      const LearnerState s = e->learner();
      reply(res, 200,
            json{{"hash", e->learner_hash()},
                 {"labels_used", e->labels_used()},
                 {"budget", e->config().hitl.learner.budget},
                 {"budget_remaining", e->budget_remaining()},
                 {"snapshots", s.snapshots.size()},
                 {"finalized", s.omega.has_value()}});
    });
    server.Post("/experiments/:id/control",
                [this](const httplib::Request& req, httplib::Response& res) { post_control(req, res); });
    server.Get("/policies", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, json{{"builtin", {"default", "static", "cloud-only", "fog-only"}}});
    });

    if (!opts.static_dir.empty()) server.set_mount_point("/", opts.static_dir);
  }

  void post_dataset(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    std::vector<Scene> scenes;
    try {
      if (body->contains("spec")) {
        const DatasetSpec spec = dataset_spec_from_json(body->at("spec"));
        validate(spec);
        scenes = generate_dataset(spec, body->value("seed", std::uint64_t{1}));
      } else if (body->contains("content")) {
        std::istringstream in(body->at("content").get<std::string>());
        scenes = read_dataset(in);
      } else if (body->contains("path")) {
        scenes = load_dataset(body->at("path").get<std::string>());
      } else {
        fail(res, 400, "missing_field", "spec", "expected one of spec, content or path");
        return;
      }
    } catch (const ConfigError& e) {
      json out = error_body("invalid_dataset", e.issues().empty() ? "" : e.issues().front().field, e.what());
      out["errors"] = json::array();
      for (const ConfigIssue& i : e.issues()) out["errors"].push_back(to_json(i));
      reply(res, 400, out);
      return;
    } catch (const std::exception& e) {
      fail(res, 400, "invalid_dataset", "", e.what());
      return;
    }
    std::lock_guard lock(mu);
    const std::string id = "d" + std::to_string(next_dataset++);
    Dataset d{std::make_shared<const std::vector<Scene>>(std::move(scenes)), {}};
    d.summary = dataset_summary(id, *d.scenes);
    reply(res, 201, d.summary);
    datasets.emplace(id, std::move(d));
  }

  void post_experiment(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    ExperimentConfig cfg;
    try {
      cfg = parse_config(*body);
    } catch (const ConfigError& e) {
      json out = error_body("invalid_config", e.issues().empty() ? "" : e.issues().front().field, e.what());
      out["errors"] = json::array();
      for (const ConfigIssue& i : e.issues()) out["errors"].push_back(to_json(i));
      reply(res, 409, out);
      return;
    }
    std::shared_ptr<const std::vector<Scene>> scenes;
    if (!cfg.dataset.id.empty()) {
      std::lock_guard lock(mu);
      auto it = datasets.find(cfg.dataset.id);
      if (it == datasets.end()) {
        json out = error_body("invalid_config", "dataset.id", "unknown dataset " + cfg.dataset.id);
        out["errors"] = json::array({out});
        reply(res, 409, out);
        return;
      }
      scenes = it->second.scenes;
    } else {
      try {
        scenes = std::make_shared<const std::vector<Scene>>(resolve_dataset(cfg.dataset));
      } catch (const std::exception& e) {
        json out = error_body("invalid_config", "dataset", e.what());
        out["errors"] = json::array({out});
        reply(res, 409, out);
        return;
      }
    }
    auto engine = std::make_shared<Engine>(cfg, scenes);
    std::string id;
    {
      std::lock_guard lock(mu);
      id = "e" + std::to_string(next_experiment++);
      experiments.emplace(id, Experiment{id, engine});
    }
    engine->start();
    reply(res, 201, json{{"experiment_id", id}, {"status", status(id, *engine)}});
  }

  // Events name tasks by their local id; clients only know wire ids.
  static json wire_event(const std::string& exp, json ev) {
    const std::string type = ev.value("type", "");
    if (type == "task") {
      ev["task"] = task_wire(exp, ev["task"]);
    } else if ((type == "label" || type == "dismissed") && ev.contains("task_id")) {
      ev["task_id"] = exp + "-" + std::to_string(ev["task_id"].get<std::int64_t>());
    }
    return ev;
  }

  static json task_wire(const std::string& exp, json j) {
    j["task_id"] = exp + "-" + std::to_string(j["task_id"].get<std::int64_t>());
    j["experiment_id"] = exp;
    return j;
  }

  void get_events(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    auto e = find(id, res);
    if (!e) return;
    std::size_t from = 0;
    if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
    const bool follow = req.get_param_value("follow") != "false";
    res.set_chunked_content_provider(
        "application/x-ndjson", [e, id, from, follow](std::size_t, httplib::DataSink& sink) mutable {
          while (sink.is_writable()) {
            auto batch = e->events(from, 512);
            if (!batch.empty()) {
              std::string out;
              for (const json& ev : batch) out += wire_event(id, ev).dump() + '\n';
              from += batch.size();
              return sink.write(out.data(), out.size());
            }
            if (!follow || e->finished()) {
              if (e->event_count() <= from) {
                sink.done();
                return true;
              }
              continue;
            }
            e->wait_events(from, std::chrono::milliseconds(250));
          }
          return false;
        });
  }

  void post_annotation(const httplib::Request& req, httplib::Response& res, bool dismiss) {
    const std::string wire = req.path_params.at("task_id");
    const auto dash = wire.rfind('-');
    std::int64_t local = 0;
    try {
      if (dash == std::string::npos) throw std::invalid_argument("no experiment prefix");
      local = std::stoll(wire.substr(dash + 1));
    } catch (const std::exception&) {
      fail(res, 404, "not_found", "task_id", "unknown task " + wire);
      return;
    }
    auto e = find(wire.substr(0, dash), res);
    if (!e) return;
    try {
      if (dismiss) {
        e->dismiss_task(local);
        reply(res, 200, json{{"task_id", wire}, {"state", "dismissed"}});
        return;
      }
      auto body = parse_body(req, res);
      if (!body) return;
      if (!body->contains("class_id") || !body->at("class_id").is_number_integer()) {
        fail(res, 400, "invalid_type", "class_id", "class_id must be an integer");
        return;
      }
      // Open tasks hold a share of the budget, so a spent budget is only
      // visible here, once every reserved task has been answered.
      if (e->budget_remaining() <= 0) {
        fail(res, 410, "budget_exhausted", "task_id", "human labor budget exhausted");
        return;
      }
      const AnnotationTask t = e->submit_label(local, body->at("class_id").get<int>());
      json out = task_json(wire.substr(0, dash), t);
      out["learner_hash"] = e->learner_hash();
      out["budget_remaining"] = e->budget_remaining();
      reply(res, 200, out);
    } catch (const UnknownTask& ex) {
      fail(res, 404, "not_found", "task_id", ex.what());
    } catch (const TaskConflict& ex) {
      fail(res, 409, "conflict", "task_id", ex.what());
    } catch (const BudgetExhausted& ex) {
      fail(res, 410, "budget_exhausted", "task_id", ex.what());
    } catch (const InvariantError& ex) {
      fail(res, 400, "out_of_range", "class_id", ex.what());
    }
  }

  void post_control(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    auto e = find(id, res);
    if (!e) return;
    auto body = parse_body(req, res);
    if (!body) return;
    const std::string action = body->value("action", "");
    if (action == "pause") {
      e->pause();
    } else if (action == "resume") {
      e->resume();
    } else if (action == "kill_cloud") {
      e->kill_cloud();
    } else if (action == "restore_cloud") {
      e->restore_cloud();
    } else if (action == "set_policy") {
      const std::string policy = body->value("policy", "");
      try {
        e->set_policy(policy);
      } catch (const std::exception& ex) {
        fail(res, 400, "invalid_value", "policy", ex.what());
        return;
      }
    } else {
      fail(res, 400, "invalid_value", "action",
           "action must be one of pause, resume, kill_cloud, restore_cloud, set_policy");
      return;
    }
    reply(res, 200, status(id, *e));
  }
};

Gateway::Gateway(GatewayOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

Gateway::~Gateway() { stop(); }

int Gateway::bind() {
  int port = impl_->opts.port;
  if (port == 0) port = port_from_env();
  if (port < 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->opts.host);
  } else if (impl_->server.bind_to_port(impl_->opts.host, port)) {
    impl_->port = port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) throw std::runtime_error("cannot bind " + impl_->opts.host + ":" + std::to_string(port));
  return impl_->port;
}

void Gateway::serve() { impl_->server.listen_after_bind(); }

int Gateway::start() {
  const int p = bind();
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
  return p;
}

void Gateway::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  std::vector<std::shared_ptr<Engine>> engines;
  {
    std::lock_guard lock(impl_->mu);
    for (auto& [id, e] : impl_->experiments) engines.push_back(e.engine);
  }
  for (auto& e : engines) e->stop();
}

int Gateway::port() const { return impl_->port; }

}  // namespace hilo
