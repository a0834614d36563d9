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

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/annotation.hpp"
#include "hilo/config.hpp"
#include "hilo/metrics.hpp"
#include "hilo/runtime/failover.hpp"
#include "hilo/runtime/provisioner.hpp"
#include "hilo/runtime/registry.hpp"
#include "hilo/strategies.hpp"

namespace hilo {

/// Loads or generates the scenes a config points at. Datasets registered by
/// id live in the gateway and are not resolved here.
std::vector<Scene> resolve_dataset(const DatasetRef& ref);

/// One experiment: cameras replay the dataset through a strategy while the
/// runtime watches the cloud link, scales the cloud pool and feeds human
/// labels back into the fog classifier.
///
/// All state sits behind one mutex, so the gateway may call any method while
/// a background thread drives the simulation.
class Engine {
 public:
  Engine(ExperimentConfig cfg, std::shared_ptr<const std::vector<Scene>> scenes);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<Scene>& scenes() const { return *scenes_; }

  /// Runs to completion on the calling thread, ignoring pacing.
  void run();
  /// Advances the simulation up to `t_us` on the calling thread.
  void run_until(std::int64_t t_us);
  /// Drives the simulation on a background thread; live mode paces it
  /// against the wall clock.
  void start();
  /// Blocks until the run is finished or stopped.
  void wait();
  void stop();

  void pause();
  void resume();
  void kill_cloud();
  void restore_cloud();
  /// Throws RegistryError for unknown policies.
  void set_policy(const std::string& policy_id);
  PolicyRegistry& policies() { return policies_; }

  bool finished() const;
  bool paused() const;
  std::int64_t now_us() const;
  std::string policy() const;

  std::vector<ProtocolTrace> traces() const;
  MetricsReport metrics() const;
  std::vector<MonitorSample> monitor_samples() const;
  /// (time, replicas) after every change of the cloud pool, starting at 0.
  std::vector<std::pair<std::int64_t, int>> replica_history() const;
  std::optional<std::int64_t> outage_detected_at() const;

  std::size_t event_count() const;
  std::vector<nlohmann::json> events(std::size_t from, std::size_t max = SIZE_MAX) const;
  /// Waits until there are events past `from` or the run ends. Returns true
  /// if new events exist.
  bool wait_events(std::size_t from, std::chrono::milliseconds timeout) const;

  std::optional<AnnotationTask> next_task();
  /// Records a human label and updates the fog classifier right away.
  AnnotationTask submit_label(std::int64_t task_id, int class_id);
  void dismiss_task(std::int64_t task_id);
  LearnerState learner() const;
  std::string learner_hash() const;
  /// Budget minus labels used; open tasks do not count against it here.
  int budget_remaining() const;
  int labels_used() const;

  /// Chunks that arrived, finished, and never finished before the horizon.
  struct Conservation {
    int scheduled = 0;
    int completed = 0;
    int unfinished = 0;
  };
  Conservation conservation() const;

 private:
  struct TimelineChunk {
    const Scene* scene;
    const SceneChunk* chunk;
    std::int64_t scene_start_us;
  };

  void build_timeline();
  void schedule_arrivals();
  int cameras_at(std::int64_t t) const;
  void dispatch(ChunkJob job);
  void on_done(ChunkResult r);
  void on_fail(ChunkJob job, ProtocolTrace partial);
  void heartbeat();
  void monitor();
  void request_review(const ReviewCandidate& c);
  void scripted_annotate(std::int64_t task_id);
  AnnotationTask submit_locked(std::int64_t task_id, int class_id);
  void train_step();
  bool done_locked() const;
  bool periodic_active() const;
  void emit(nlohmann::json e);
  void check_finished();
  std::int64_t control_time() const;
  void loop();
  MetricsReport metrics_locked() const;

  ExperimentConfig cfg_;
  std::shared_ptr<const std::vector<Scene>> scenes_;
  std::vector<std::vector<SceneChunk>> scene_chunks_;
  std::vector<TimelineChunk> timeline_;
  std::int64_t cycle_len_us_ = 0;
  std::int64_t chunk_period_us_ = 0;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::unique_ptr<SimEnv> env_;
  PolicyRegistry policies_;
  Policy policy_;
  Provisioner provisioner_;
  HeartbeatDetector heartbeat_;
  AnnotationQueue queue_;

  int scheduled_ = 0;
  int completed_ = 0;
  std::int64_t last_arrival_us_ = 0;
  std::int64_t horizon_us_ = 0;
  std::vector<ChunkJob> cached_;
  std::vector<ProtocolTrace> traces_;
  std::vector<MonitorSample> samples_;
  std::vector<MonitorSample> window_;
  std::vector<std::pair<std::int64_t, int>> replicas_;
  std::vector<nlohmann::json> events_;
  std::vector<LabeledExample> labeled_;
  int pending_train_ = 0;
  int in_flight_ = 0;
  int retrains_ = 0;
  double latency_ewma_ms_ = 0.0;
  std::optional<std::int64_t> detected_at_;
  std::optional<std::int64_t> recovered_at_;
  bool finished_ = false;

  // Background driver.
  std::thread thread_;
  bool stop_ = false;
  bool paused_ = false;
  bool running_ = false;
  std::chrono::steady_clock::time_point wall0_;
  std::int64_t sim0_ = 0;
};

}  // namespace hilo
