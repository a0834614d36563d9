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

#include "hilo/engine.hpp"

#include <algorithm>
#include <cmath>

#include "hilo/random.hpp"

namespace hilo {

using nlohmann::json;

namespace {

constexpr double kGoldenFraction = 0.6180339887498949;
/// How long the run may continue after the last chunk arrives.
constexpr std::int64_t kDrainUs = 600 * kUsPerSecond;

int class_count(const std::vector<Scene>& scenes) {
  int k = 2;
  for (const Scene& s : scenes) k = std::max(k, s.classes);
  return k;
}

json trace_event(const ProtocolTrace& t) {
  json j = to_json(t);
  int backup = 0, fog = 0, cloud = 0, human = 0;
  for (const LabelResult& l : t.labels) {
    switch (l.source) {
      case LabelSource::backup: ++backup; break;
      case LabelSource::fog: ++fog; break;
      case LabelSource::cloud: ++cloud; break;
      case LabelSource::human: ++human; break;
    }
  }
  j["sources"] = {{"cloud", cloud}, {"fog", fog}, {"backup", backup}, {"human", human}};
  return j;
}

}  // namespace

std::vector<Scene> resolve_dataset(const DatasetRef& ref) {
  if (ref.spec) return generate_dataset(*ref.spec, ref.seed);
  if (!ref.path.empty()) return load_dataset(ref.path);
  throw std::invalid_argument("dataset reference has neither a spec nor a path");
}

Engine::Engine(ExperimentConfig cfg, std::shared_ptr<const std::vector<Scene>> scenes)
    : cfg_(std::move(cfg)),
      scenes_(std::move(scenes)),
      policies_(Watermarks{cfg_.autoscale.high_water, cfg_.autoscale.low_water}),
      provisioner_(cfg_.autoscale),
      heartbeat_(cfg_.heartbeat),
      queue_(cfg_.hitl.enabled ? cfg_.hitl.learner.budget : 0) {
  if (!scenes_) throw std::invalid_argument("engine needs a dataset");
  policy_ = policies_.get(cfg_.policy);
  env_ = std::make_unique<SimEnv>(cfg_, class_count(*scenes_));
  build_timeline();
  schedule_arrivals();
  replicas_.emplace_back(0, env_->cloud_pool.replicas());
  if (scheduled_ > 0) {
    env_->sim.schedule_at(cfg_.heartbeat.period_us, [this] { heartbeat(); });
    env_->sim.schedule_at(cfg_.monitor_period_us, [this] { monitor(); });
  }
  emit(json{{"type", "started"},
            {"strategy", to_string(cfg_.strategy)},
            {"policy", policy_.policy_id},
            {"chunks", scheduled_}});
}

Engine::~Engine() { stop(); }

void Engine::build_timeline() {
  std::int64_t next_id = 0;
  for (std::size_t s = 0; s < scenes_->size(); ++s) {
    scene_chunks_.push_back(make_chunks((*scenes_)[s], static_cast<int>(s), cfg_.chunking, cfg_.size_model, next_id));
    next_id += static_cast<std::int64_t>(scene_chunks_.back().size());
  }
  std::int64_t start = 0;
  for (std::size_t s = 0; s < scenes_->size(); ++s) {
    for (const SceneChunk& c : scene_chunks_[s]) timeline_.push_back(TimelineChunk{&(*scenes_)[s], &c, start});
    start += scene_duration_us((*scenes_)[s]);
  }
  cycle_len_us_ = start;
  const double fps = scenes_->empty() ? 30.0 : scenes_->front().fps;
  chunk_period_us_ =
      seconds_to_us(cfg_.chunking.keyframe_interval * cfg_.chunking.keyframes_per_chunk / fps);
}

int Engine::cameras_at(std::int64_t t) const {
  if (cfg_.workload.phases.empty()) return cfg_.workload.cameras;
  int n = 0;
  for (const LoadPhase& p : cfg_.workload.phases) {
    if (seconds_to_us(p.start_s) <= t) n = p.cameras;
  }
  return n;
}

void Engine::schedule_arrivals() {
  if (timeline_.empty() || cycle_len_us_ <= 0) return;
  int max_cameras = cfg_.workload.cameras;
  if (!cfg_.workload.phases.empty()) {
    max_cameras = 0;
    for (const LoadPhase& p : cfg_.workload.phases) max_cameras = std::max(max_cameras, p.cameras);
  }
  const bool once = cfg_.workload.duration_s <= 0.0;
  const std::int64_t duration = seconds_to_us(cfg_.workload.duration_s);

  struct Arrival {
    std::int64_t t;
    int camera;
    int cycle;
    const TimelineChunk* tc;
  };
  std::vector<Arrival> arrivals;
  for (int c = 0; c < max_cameras; ++c) {
    // Cameras are spread over one chunk period so they do not all finish a
    // chunk at the same instant.
    const std::int64_t offset =
        std::llround(std::fmod(c * kGoldenFraction, 1.0) * static_cast<double>(chunk_period_us_));
    for (int cycle = 0;; ++cycle) {
      if (once && cycle > 0) break;
      const std::int64_t base = offset + cycle * cycle_len_us_;
      if (!once && base > duration) break;
      for (const TimelineChunk& tc : timeline_) {
        const std::int64_t t = base + tc.scene_start_us + tc.chunk->ready_us;
        if (!once && t > duration) break;
        if (cameras_at(t) > c) arrivals.push_back(Arrival{t, c, cycle, &tc});
      }
    }
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return a.t != b.t ? a.t < b.t : a.camera < b.camera;
  });
  for (const Arrival& a : arrivals) {
    ChunkJob job;
    job.job_id = scheduled_++;
    job.stream_id = a.camera;
    job.cycle = a.cycle;
    job.scene = a.tc->scene;
    job.chunk = a.tc->chunk;
    job.ready_us = a.t;
    last_arrival_us_ = std::max(last_arrival_us_, a.t);
    env_->sim.schedule_at(a.t, [this, job] { dispatch(job); });
  }
  horizon_us_ = last_arrival_us_ + kDrainUs;
}

void Engine::dispatch(ChunkJob job) {
  const Decision d = decide(policy_, PolicyContext{heartbeat_.cloud_up(), std::nullopt});
  switch (d.route) {
    case Route::cloud:
      start_chunk(
          *env_, cfg_.strategy, job, [this](ChunkResult r) { on_done(std::move(r)); },
          [this, job](ProtocolTrace p) { on_fail(job, std::move(p)); });
      break;
    case Route::backup:
      start_backup(*env_, cfg_.strategy, job, [this](ChunkResult r) { on_done(std::move(r)); });
      break;
    case Route::wait:
      cached_.push_back(std::move(job));
      break;
  }
}

void Engine::on_fail(ChunkJob job, ProtocolTrace partial) {
  emit(json{{"type", "attempt_failed"}, {"chunk_id", job.job_id}, {"attempt", partial.attempts}});
  job.prior = std::move(partial);
  // Until the heartbeat notices, the chunk waits on the fog.
  if (heartbeat_.cloud_up()) {
    cached_.push_back(std::move(job));
  } else {
    dispatch(std::move(job));
  }
}

void Engine::on_done(ChunkResult r) {
  const double latency_ms = static_cast<double>(r.trace.done_us - r.trace.ready_us) / 1000.0;
  latency_ewma_ms_ = completed_ == 0 ? latency_ms : 0.8 * latency_ewma_ms_ + 0.2 * latency_ms;
  emit(json{{"type", "trace"}, {"trace", trace_event(r.trace)}});
  traces_.push_back(std::move(r.trace));
  ++completed_;
  for (const ReviewCandidate& c : r.review) request_review(c);
  check_finished();
}

// Scripted labels and retrain jobs still in flight keep the run open.
bool Engine::done_locked() const { return completed_ >= scheduled_ && in_flight_ == 0; }

bool Engine::periodic_active() const { return !done_locked() && env_->sim.now() < horizon_us_; }

void Engine::heartbeat() {
  if (finished_) return;
  const std::int64_t t = env_->sim.now();
  const bool ok = env_->wan_up.is_up(t) && env_->wan_down.is_up(t);
  switch (heartbeat_.on_beat(t, ok)) {
    case HeartbeatDetector::Transition::went_down: {
      detected_at_ = t;
      emit(json{{"type", "failover"}, {"detected_us", t}, {"cached", cached_.size()}});
      auto jobs = std::move(cached_);
      cached_.clear();
      for (ChunkJob& j : jobs) dispatch(std::move(j));
      break;
    }
    case HeartbeatDetector::Transition::came_up: {
      recovered_at_ = t;
      emit(json{{"type", "recovered"}, {"t_us", t}, {"cached", cached_.size()}});
      auto jobs = std::move(cached_);
      cached_.clear();
      for (ChunkJob& j : jobs) dispatch(std::move(j));
      break;
    }
    case HeartbeatDetector::Transition::none:
      break;
  }
  if (periodic_active()) env_->sim.schedule_in(cfg_.heartbeat.period_us, [this] { heartbeat(); });
}

void Engine::monitor() {
  if (finished_) return;
  const std::int64_t t = env_->sim.now();
  for (WorkerPool* pool : {&env_->cloud_pool, &env_->fog_pool}) {
    const WorkerPool::WindowStats w = pool->take_window();
    MonitorSample s;
    s.t_us = t;
    s.pool = pool->name();
    s.replicas = pool->replicas();
    s.serving = pool->serving_replicas();
    s.replica_utilization = w.replica_utilization;
    s.utilization = w.utilization;
    s.queue_depth = w.queue_depth;
    s.queued = static_cast<int>(pool->queued());
    const double len_s = us_to_seconds(w.end_us - w.start_us);
    s.throughput = len_s > 0 ? w.completed / len_s : 0.0;
    s.latency_ewma_ms = pool == &env_->cloud_pool ? latency_ewma_ms_ : w.mean_service_ms;
    samples_.push_back(s);
    emit(json{{"type", "monitor"}, {"sample", to_json(s)}});
    if (pool != &env_->cloud_pool) continue;
    window_.push_back(s);
    if (static_cast<int>(window_.size()) < cfg_.autoscale.window_samples) continue;
    const int current = env_->cloud_pool.replicas();
    const int delta = provisioner_.provision(window_, current, policy_);
    window_.clear();
    if (delta != 0) {
      env_->cloud_pool.scale_to(current + delta);
      replicas_.emplace_back(t, current + delta);
      emit(json{{"type", "scale"}, {"t_us", t}, {"from", current}, {"to", current + delta}});
    }
  }
  if (periodic_active()) env_->sim.schedule_in(cfg_.monitor_period_us, [this] { monitor(); });
}

void Engine::request_review(const ReviewCandidate& c) {
  if (!cfg_.hitl.enabled || queue_.remaining() <= 0) return;
  AnnotationTask task;
  task.chunk_id = c.job_id;
  task.frame_index = c.frame->frame_index;
  task.region = c.region;
  task.frame = *c.frame;
  task.feature = c.feature;
  task.predicted_class = c.predicted_class;
  task.predicted_score = c.score;
  task.created_us = env_->sim.now();
  std::int64_t id = 0;
  try {
    id = queue_.enqueue(std::move(task));
  } catch (const BudgetExhausted&) {
    return;
  }
  emit(json{{"type", "task"}, {"task", to_json(*queue_.get(id))}});
  if (cfg_.hitl.annotator.mode == AnnotatorConfig::Mode::scripted) {
    ++in_flight_;
    env_->sim.schedule_in(ms_to_us(cfg_.hitl.annotator.delay_ms), [this, id] {
      --in_flight_;
      scripted_annotate(id);
    });
  }
}

void Engine::scripted_annotate(std::int64_t task_id) {
  if (!queue_.claim(task_id)) return;  // an external annotator got there first
  const auto task = queue_.get(task_id);
  // Scripted annotator: answers from the groundtruth behind the region.
  const int idx = dominant_object(task->region, task->frame);
  if (idx < 0) {
    queue_.dismiss(task_id);
    emit(json{{"type", "dismissed"}, {"task_id", task_id}});
    return;
  }
  submit_locked(task_id, task->frame.objects[static_cast<std::size_t>(idx)].class_id);
}

AnnotationTask Engine::submit_locked(std::int64_t task_id, int class_id) {
  AnnotationTask t = queue_.submit(task_id, class_id, env_->learner.classes());
  apply_label(env_->learner, t.feature, class_id);
  labeled_.push_back(LabeledExample{t.feature, class_id});
  emit(json{{"type", "label"},
            {"task_id", task_id},
            {"class", class_id},
            {"predicted", t.predicted_class},
            {"labels_used", queue_.labeled()},
            {"budget_remaining", queue_.budget() - queue_.labeled()}});
  train_step();
  if (cfg_.hitl.finalize && queue_.labeled() >= cfg_.hitl.learner.budget && !env_->learner.omega) {
    snapshot_and_finalize(env_->learner, labeled_);
    emit(json{{"type", "finalized"}, {"snapshots", env_->learner.snapshots.size()}});
  }
  return t;
}

void Engine::train_step() {
  if (++pending_train_ < cfg_.hitl.train_batch) return;
  const int n = pending_train_;
  pending_train_ = 0;
  ++in_flight_;
  env_->fog_pool.submit(ms_to_us(cfg_.hitl.train_cost.latency_ms(n)), [this, n](std::int64_t s, std::int64_t e) {
    --in_flight_;
    ++retrains_;
    emit(json{{"type", "retrain"}, {"start_us", s}, {"end_us", e}, {"labels", n}});
  });
}

void Engine::emit(json e) {
  e["seq"] = events_.size();
  if (!e.contains("t_us")) e["t_us"] = env_ ? env_->sim.now() : 0;
  events_.push_back(std::move(e));
  cv_.notify_all();
}

void Engine::check_finished() {
  if (finished_ || !done_locked()) return;
  finished_ = true;
  emit(json{{"type", "finished"}, {"completed", completed_}, {"scheduled", scheduled_}});
}

void Engine::run() {
  std::lock_guard lock(mu_);
  while (env_->sim.step()) check_finished();
  if (!finished_) {
    finished_ = true;
    emit(json{{"type", "finished"}, {"completed", completed_}, {"scheduled", scheduled_}});
  }
}

void Engine::run_until(std::int64_t t_us) {
  std::lock_guard lock(mu_);
  while (auto next = env_->sim.next_time()) {
    if (*next > t_us) break;
    env_->sim.step();
    check_finished();
  }
  if (t_us > env_->sim.now()) env_->sim.run_until(t_us);
}

void Engine::start() {
  std::lock_guard lock(mu_);
  if (running_ || finished_) return;
  running_ = true;
  stop_ = false;
  thread_ = std::thread([this] { loop(); });
}

void Engine::loop() {
  std::unique_lock lk(mu_);
  const bool live = cfg_.mode == ExperimentConfig::Mode::live;
  wall0_ = std::chrono::steady_clock::now();
  sim0_ = env_->sim.now();
  int steps = 0;
  while (!stop_ && !finished_) {
    if (paused_) {
      cv_.wait(lk, [&] { return !paused_ || stop_; });
      wall0_ = std::chrono::steady_clock::now();
      continue;
    }
    const auto next = env_->sim.next_time();
    if (!next) {
      finished_ = true;
      emit(json{{"type", "finished"}, {"completed", completed_}, {"scheduled", scheduled_}});
      break;
    }
    if (live) {
      const auto due = wall0_ + std::chrono::microseconds(static_cast<std::int64_t>(
                                    static_cast<double>(*next - sim0_) / cfg_.pacing));
      if (std::chrono::steady_clock::now() < due) {
        cv_.wait_until(lk, due);
        continue;
      }
    }
    env_->sim.step();
    check_finished();
    if (++steps % 256 == 0) {
      // Let API readers in between stretches of simulation.
      lk.unlock();
      std::this_thread::yield();
      lk.lock();
    }
  }
  running_ = false;
  cv_.notify_all();
}

void Engine::wait() {
  {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return !running_; });
  }
  if (thread_.joinable()) thread_.join();
}

void Engine::stop() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
    cv_.notify_all();
  }
  if (thread_.joinable()) thread_.join();
}

std::int64_t Engine::control_time() const {
  const std::int64_t now = env_->sim.now();
  if (!running_ || paused_ || cfg_.mode != ExperimentConfig::Mode::live) return now;
  const auto wall = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - wall0_);
  const auto mapped = sim0_ + static_cast<std::int64_t>(static_cast<double>(wall.count()) * cfg_.pacing);
  return std::max(now, mapped);
}

void Engine::pause() {
  std::lock_guard lock(mu_);
  if (paused_) return;
  sim0_ = control_time();
  paused_ = true;
  emit(json{{"type", "control"}, {"action", "pause"}});
  cv_.notify_all();
}

void Engine::resume() {
  std::lock_guard lock(mu_);
  if (!paused_) return;
  paused_ = false;
  emit(json{{"type", "control"}, {"action", "resume"}});
  cv_.notify_all();
}

void Engine::kill_cloud() {
  std::lock_guard lock(mu_);
  const std::int64_t t = control_time();
  env_->wan_up.add_outage(Outage{t, std::nullopt});
  env_->wan_down.add_outage(Outage{t, std::nullopt});
  emit(json{{"type", "control"}, {"action", "kill_cloud"}, {"at_us", t}});
  cv_.notify_all();
}

void Engine::restore_cloud() {
  std::lock_guard lock(mu_);
  const std::int64_t t = control_time();
  env_->wan_up.end_outage(t);
  env_->wan_down.end_outage(t);
  emit(json{{"type", "control"}, {"action", "restore_cloud"}, {"at_us", t}});
  cv_.notify_all();
}

void Engine::set_policy(const std::string& policy_id) {
  std::lock_guard lock(mu_);
  policy_ = policies_.get(policy_id);
  emit(json{{"type", "control"}, {"action", "set_policy"}, {"policy", policy_id}});
  auto jobs = std::move(cached_);
  cached_.clear();
  for (ChunkJob& j : jobs) dispatch(std::move(j));
  cv_.notify_all();
}

bool Engine::finished() const {
  std::lock_guard lock(mu_);
  return finished_;
}

bool Engine::paused() const {
  std::lock_guard lock(mu_);
  return paused_;
}

std::int64_t Engine::now_us() const {
  std::lock_guard lock(mu_);
  return env_->sim.now();
}

std::string Engine::policy() const {
  std::lock_guard lock(mu_);
  return policy_.policy_id;
}

std::vector<ProtocolTrace> Engine::traces() const {
  std::lock_guard lock(mu_);
  std::vector<ProtocolTrace> out = traces_;
  std::stable_sort(out.begin(), out.end(),
                   [](const ProtocolTrace& a, const ProtocolTrace& b) { return a.chunk_id < b.chunk_id; });
  return out;
}

MetricsReport Engine::metrics_locked() const {
  std::vector<ProtocolTrace> sorted = traces_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ProtocolTrace& a, const ProtocolTrace& b) { return a.chunk_id < b.chunk_id; });
  MetricsOptions opts;
  opts.strategy = to_string(cfg_.strategy);
  opts.match = MatchConfig{cfg_.metrics.iou_match, cfg_.metrics.per_class};
  opts.price_per_frame = cfg_.metrics.price_per_frame;
  MetricsReport r = compute_metrics(sorted, *scenes_, opts);
  int max_replicas = 0;
  for (const auto& [t, n] : replicas_) max_replicas = std::max(max_replicas, n);
  r.extra = json{{"finished", finished_},
                 {"sim_time_s", us_to_seconds(env_->sim.now())},
                 {"conservation",
                  {{"scheduled", scheduled_},
                   {"completed", completed_},
                   {"unfinished", finished_ ? scheduled_ - completed_ : 0}}},
                 {"hitl",
                  {{"budget", queue_.budget()},
                   {"labels_used", queue_.labeled()},
                   {"open_tasks", queue_.open()},
                   {"budget_remaining", queue_.budget() - queue_.labeled()},
                   {"retrains", retrains_},
                   {"finalized", env_->learner.omega.has_value()}}},
                 {"runtime",
                  {{"policy", policy_.policy_id},
                   {"replicas", env_->cloud_pool.replicas()},
                   {"max_replicas", max_replicas},
                   {"scale_events", replicas_.size() - 1},
                   {"outage_detected_s", detected_at_ ? json(us_to_seconds(*detected_at_)) : json(nullptr)},
                   {"recovered_s", recovered_at_ ? json(us_to_seconds(*recovered_at_)) : json(nullptr)}}}};
  return r;
}

MetricsReport Engine::metrics() const {
  std::lock_guard lock(mu_);
  return metrics_locked();
}

std::vector<MonitorSample> Engine::monitor_samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

std::vector<std::pair<std::int64_t, int>> Engine::replica_history() const {
  std::lock_guard lock(mu_);
  return replicas_;
}

std::optional<std::int64_t> Engine::outage_detected_at() const {
  std::lock_guard lock(mu_);
  return detected_at_;
}

std::size_t Engine::event_count() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

std::vector<json> Engine::events(std::size_t from, std::size_t max) const {
  std::lock_guard lock(mu_);
  std::vector<json> out;
  for (std::size_t i = from; i < events_.size() && out.size() < max; ++i) out.push_back(events_[i]);
  return out;
}

bool Engine::wait_events(std::size_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return events_.size() > from || finished_ || stop_; });
  return events_.size() > from;
}

std::optional<AnnotationTask> Engine::next_task() {
  std::lock_guard lock(mu_);
  return queue_.claim_next();
}

AnnotationTask Engine::submit_label(std::int64_t task_id, int class_id) {
  std::lock_guard lock(mu_);
  return submit_locked(task_id, class_id);
}

void Engine::dismiss_task(std::int64_t task_id) {
  std::lock_guard lock(mu_);
  queue_.dismiss(task_id);
  emit(json{{"type", "dismissed"}, {"task_id", task_id}});
}

LearnerState Engine::learner() const {
  std::lock_guard lock(mu_);
  return env_->learner;
}

std::string Engine::learner_hash() const {
  std::lock_guard lock(mu_);
  return checkpoint_hash(env_->learner);
}

int Engine::budget_remaining() const {
  std::lock_guard lock(mu_);
  return queue_.budget() - queue_.labeled();
}

int Engine::labels_used() const {
  std::lock_guard lock(mu_);
  return queue_.labeled();
}

Engine::Conservation Engine::conservation() const {
  std::lock_guard lock(mu_);
  return Conservation{scheduled_, completed_, finished_ ? scheduled_ - completed_ : 0};
}

}  // namespace hilo
