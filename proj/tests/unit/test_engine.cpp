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

#include <doctest.h>

#include <set>
#include <thread>

#include "hilo/engine.hpp"

using namespace hilo;
using nlohmann::json;

namespace {

ExperimentConfig config(const std::string& name) { return load_config(std::string(HILO_CONFIG_DIR) + "/" + name); }

std::unique_ptr<Engine> make(const ExperimentConfig& cfg) {
  return std::make_unique<Engine>(cfg, std::make_shared<const std::vector<Scene>>(resolve_dataset(cfg.dataset)));
}

std::vector<json> events_of(const Engine& e, const std::string& type) {
  std::vector<json> out;
  for (const json& ev : e.events(0)) {
    if (ev.at("type") == type) out.push_back(ev);
  }
  return out;
}

}  // namespace

TEST_CASE("every scheduled chunk finishes exactly once") {
  for (StrategyKind s : all_strategies()) {
    ExperimentConfig cfg = config("default.json");
    cfg.strategy = s;
    auto e = make(cfg);
    e->run();
    CHECK(e->finished());
    const auto c = e->conservation();
    CHECK(c.scheduled > 0);
    CHECK(c.completed == c.scheduled);
    CHECK(c.unfinished == 0);
    const auto traces = e->traces();
    CHECK(traces.size() == static_cast<std::size_t>(c.completed));
    std::set<std::int64_t> ids;
    for (const auto& t : traces) ids.insert(t.chunk_id);
    CHECK(ids.size() == traces.size());
  }
}

TEST_CASE("runs are deterministic") {
  const ExperimentConfig cfg = config("outage.json");
  auto a = make(cfg);
  auto b = make(cfg);
  a->run();
  b->run();
  CHECK(to_json(a->metrics()) == to_json(b->metrics()));
  CHECK(a->learner_hash() == b->learner_hash());
  CHECK(a->event_count() == b->event_count());
}

TEST_CASE("events are numbered and bracket the run") {
  auto e = make(config("default.json"));
  e->run();
  const auto evs = e->events(0);
  REQUIRE(evs.size() >= 3);
  CHECK(evs.front().at("type") == "started");
  CHECK(evs.back().at("type") == "finished");
  for (std::size_t i = 0; i < evs.size(); ++i) {
    CHECK(evs[i].at("seq") == i);
    if (i > 0) CHECK(evs[i].at("t_us").get<std::int64_t>() >= evs[i - 1].at("t_us").get<std::int64_t>());
  }
  CHECK(e->events(evs.size() - 2).size() == 2);
  CHECK(e->events(0, 5).size() == 5);
  CHECK(e->events(evs.size()).empty());
  CHECK_FALSE(e->wait_events(evs.size(), std::chrono::milliseconds(10)));
  CHECK(events_of(*e, "trace").size() == e->traces().size());
}

TEST_CASE("a cloud outage fails over to the backup detector and back") {
  const ExperimentConfig cfg = config("outage.json");
  auto e = make(cfg);
  e->run();
  REQUIRE(e->outage_detected_at());
  const std::int64_t detected = *e->outage_detected_at();
  const std::int64_t start = seconds_to_us(cfg.network.outages[0].start_s);
  const std::int64_t end = seconds_to_us(*cfg.network.outages[0].end_s);
  CHECK(detected >= start);
  CHECK(detected <= start + cfg.heartbeat.period_us * (cfg.heartbeat.missed_beats + 1));
  CHECK(events_of(*e, "failover").size() == 1);
  CHECK(events_of(*e, "recovered").size() == 1);

  bool saw_backup = false;
  for (const auto& t : e->traces()) {
    if (t.ready_us >= detected && t.ready_us < end) {
      CHECK(t.path == "backup");
      CHECK(t.uplink_bytes == 0);
      saw_backup = true;
    }
    if (t.ready_us >= end + 2 * cfg.heartbeat.period_us) CHECK(t.path == "cloud");
  }
  CHECK(saw_backup);
  const auto c = e->conservation();
  CHECK(c.completed == c.scheduled);
  const json m = to_json(e->metrics());
  CHECK(m.at("extra").at("runtime").at("outage_detected_s").get<double>() == doctest::Approx(us_to_seconds(detected)));
}

TEST_CASE("killing the cloud by hand also fails over") {
  ExperimentConfig cfg = config("outage.json");
  cfg.network.outages.clear();
  auto e = make(cfg);
  e->run_until(seconds_to_us(20));
  e->kill_cloud();
  e->run_until(seconds_to_us(45));
  REQUIRE(e->outage_detected_at());
  CHECK(*e->outage_detected_at() >= seconds_to_us(20));
  e->restore_cloud();
  e->run();
  CHECK(events_of(*e, "recovered").size() == 1);
  int backup = 0;
  for (const auto& t : e->traces()) backup += t.path == "backup" ? 1 : 0;
  CHECK(backup > 0);
  CHECK(e->conservation().unfinished == 0);
}

TEST_CASE("a load step scales the cloud pool out and back in") {
  const ExperimentConfig cfg = config("scale.json");
  auto e = make(cfg);
  e->run();
  const auto hist = e->replica_history();
  REQUIRE(hist.size() >= 3);
  CHECK(hist.front() == std::pair<std::int64_t, int>{0, cfg.cloud_replicas});
  int peak = 0;
  std::int64_t first_out = -1;
  for (const auto& [t, n] : hist) {
    CHECK(n >= cfg.autoscale.min_replicas);
    CHECK(n <= cfg.autoscale.max_replicas);
    if (n > peak) peak = n;
    if (first_out < 0 && n > cfg.cloud_replicas) first_out = t;
  }
  CHECK(peak > cfg.cloud_replicas);
  // Scale-out follows the step within two provisioning windows plus one chunk.
  const std::int64_t window = cfg.monitor_period_us * cfg.autoscale.window_samples;
  CHECK(first_out >= seconds_to_us(60));
  CHECK(first_out <= seconds_to_us(60) + 2 * window + seconds_to_us(7.5));
  CHECK(hist.back().second < peak);
  CHECK_FALSE(events_of(*e, "scale").empty());
  CHECK_FALSE(e->monitor_samples().empty());
  CHECK(e->conservation().unfinished == 0);
}

TEST_CASE("external annotators drive the learner") {
  ExperimentConfig cfg = config("drift.json");
  cfg.hitl.annotator.mode = AnnotatorConfig::Mode::external;
  cfg.hitl.learner.budget = 3;
  auto e = make(cfg);
  e->run_until(seconds_to_us(60));
  const std::string h0 = e->learner_hash();
  auto task = e->next_task();
  REQUIRE(task);
  CHECK(task->state == TaskState::claimed);
  const int cls = task->frame.objects.empty() ? 0 : task->frame.objects.front().class_id;
  const AnnotationTask done = e->submit_label(task->task_id, cls);
  CHECK(done.state == TaskState::labeled);
  CHECK(e->labels_used() == 1);
  CHECK(e->budget_remaining() == 2);
  CHECK(e->learner_hash() != h0);
  CHECK_THROWS(e->submit_label(task->task_id, cls));

  auto other = e->next_task();
  REQUIRE(other);
  e->dismiss_task(other->task_id);
  CHECK(e->labels_used() == 1);
  CHECK_FALSE(events_of(*e, "label").empty());
  CHECK_FALSE(events_of(*e, "dismissed").empty());
}

TEST_CASE("the scripted annotator spends the budget and finalizes") {
  ExperimentConfig cfg = config("drift.json");
  cfg.hitl.learner.budget = 20;
  cfg.hitl.finalize = true;
  auto e = make(cfg);
  e->run();
  CHECK(e->labels_used() == 20);
  CHECK(e->budget_remaining() == 0);
  CHECK(e->learner().omega.has_value());
  CHECK(events_of(*e, "finalized").size() == 1);
  CHECK_FALSE(events_of(*e, "retrain").empty());
}

TEST_CASE("pause holds the clock and resume finishes the run") {
  auto e = make(config("default.json"));
  e->pause();
  e->start();
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  const auto t0 = e->now_us();
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  CHECK(e->now_us() == t0);
  CHECK(e->paused());
  e->resume();
  e->wait();
  CHECK(e->finished());
  CHECK(e->conservation().unfinished == 0);
}

TEST_CASE("stop ends a live run early") {
  ExperimentConfig cfg = config("default.json");
  cfg.mode = ExperimentConfig::Mode::live;
  cfg.pacing = 1.0;
  auto e = make(cfg);
  e->start();
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  e->stop();
  e->wait();
  CHECK(e->now_us() < seconds_to_us(5));
}

TEST_CASE("policies switch at run time") {
  ExperimentConfig cfg = config("default.json");
  auto e = make(cfg);
  CHECK_THROWS_AS(e->set_policy("nope"), RegistryError);
  CHECK(e->policy() == "default");
  e->set_policy("fog-only");
  CHECK(e->policy() == "fog-only");
  e->run();
  for (const auto& t : e->traces()) CHECK(t.path == "backup");
  CHECK(e->metrics().cost == 0.0);
}

TEST_CASE("unknown dataset references are rejected") {
  DatasetRef ref;
  CHECK_THROWS_AS(resolve_dataset(ref), std::invalid_argument);
  ref.id = "d1";
  CHECK_THROWS_AS(resolve_dataset(ref), std::invalid_argument);
}
