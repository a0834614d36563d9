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

#include "hilo/runtime/pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace hilo {

WorkerPool::WorkerPool(Simulator& sim, Config cfg) : sim_(sim), cfg_(std::move(cfg)) {
  if (cfg_.replicas < 0) throw std::invalid_argument(cfg_.name + ": replicas must be >= 0");
  if (cfg_.startup_us < 0) throw std::invalid_argument(cfg_.name + ": startup must be >= 0");
  replicas_.resize(static_cast<std::size_t>(cfg_.replicas));
  for (Replica& r : replicas_) r.serving = true;
  window_start_ = last_change_ = sim_.now();
}

int WorkerPool::replicas() const {
  return static_cast<int>(std::count_if(replicas_.begin(), replicas_.end(), [](const Replica& r) { return !r.retiring; }));
}

int WorkerPool::serving_replicas() const {
  return static_cast<int>(
      std::count_if(replicas_.begin(), replicas_.end(), [](const Replica& r) { return r.serving && !r.retiring; }));
}

int WorkerPool::busy() const {
  return static_cast<int>(std::count_if(replicas_.begin(), replicas_.end(), [](const Replica& r) { return r.busy; }));
}

void WorkerPool::accumulate() {
  const std::int64_t now = sim_.now();
  const double dt = static_cast<double>(now - last_change_);
  if (dt > 0) {
    outstanding_area_ += dt * (static_cast<double>(queue_.size()) + busy());
    int serving = 0;
    for (const Replica& r : replicas_) serving += (r.serving && (!r.retiring || r.busy)) ? 1 : 0;
    serving_area_ += dt * serving;
  }
  last_change_ = now;
}

void WorkerPool::submit(std::int64_t service_us, Done done) {
  if (service_us < 0) throw std::invalid_argument(cfg_.name + ": negative service time");
  accumulate();
  queue_.push_back(Job{service_us, std::move(done)});
  dispatch();
}

void WorkerPool::dispatch() {
  for (std::size_t i = 0; i < replicas_.size() && !queue_.empty(); ++i) {
    Replica& r = replicas_[i];
    if (!r.serving || r.retiring || r.busy) continue;
    Job job = std::move(queue_.front());
    queue_.pop_front();
    r.busy = true;
    r.busy_since = sim_.now();
    const std::int64_t start = sim_.now();
    sim_.schedule_in(job.service_us, [this, i, start, done = std::move(job.done)]() mutable {
      finish(i, start, std::move(done));
    });
  }
}

void WorkerPool::finish(std::size_t idx, std::int64_t start, Done done) {
  accumulate();
  const std::int64_t now = sim_.now();
  Replica& r = replicas_[idx];
  r.busy_acc += static_cast<double>(now - std::max(r.busy_since, window_start_));
  r.busy = false;
  ++completed_;
  service_sum_us_ += static_cast<double>(now - start);
  if (r.retiring) compact();
  dispatch();
  if (done) done(start, now);
}

void WorkerPool::activate(std::size_t idx, std::uint64_t generation) {
  if (idx >= replicas_.size() || replicas_[idx].generation != generation || replicas_[idx].retiring) return;
  accumulate();
  replicas_[idx].serving = true;
  dispatch();
}

void WorkerPool::compact() {
  // Only trailing retired replicas are removed so in-flight indices stay valid.
  while (!replicas_.empty() && replicas_.back().retiring && !replicas_.back().busy) replicas_.pop_back();
}

void WorkerPool::scale_to(int n) {
  if (n < 0) throw std::invalid_argument(cfg_.name + ": replicas must be >= 0");
  accumulate();
  int current = replicas();
  // Shrink from the highest index: starting replicas first, then idle, then busy.
  for (auto pass : {0, 1, 2}) {
    for (std::size_t i = replicas_.size(); i-- > 0 && current > n;) {
      Replica& r = replicas_[i];
      if (r.retiring) continue;
      const bool match = pass == 0 ? !r.serving : pass == 1 ? (r.serving && !r.busy) : r.busy;
      if (!match) continue;
      r.retiring = true;
      --current;
    }
  }
  compact();
  while (current < n) {
    Replica fresh;
    fresh.generation = ++generation_;
    fresh.serving = cfg_.startup_us == 0;
    replicas_.push_back(fresh);
    const std::size_t idx = replicas_.size() - 1;
    if (!fresh.serving) {
      sim_.schedule_in(cfg_.startup_us, [this, idx, g = fresh.generation] { activate(idx, g); });
    }
    ++current;
  }
  dispatch();
}

WorkerPool::WindowStats WorkerPool::take_window() {
  accumulate();
  const std::int64_t now = sim_.now();
  WindowStats s;
  s.start_us = window_start_;
  s.end_us = now;
  const double len = static_cast<double>(now - window_start_);
  double busy_total = 0.0;
  for (Replica& r : replicas_) {
    double b = r.busy_acc;
    if (r.busy) {
      b += static_cast<double>(now - std::max(r.busy_since, window_start_));
    }
    busy_total += b;
    if (r.serving && !r.retiring) s.replica_utilization.push_back(len > 0 ? std::clamp(b / len, 0.0, 1.0) : 0.0);
    r.busy_acc = 0.0;
  }
  if (len > 0) {
    s.utilization = serving_area_ > 0 ? std::clamp(busy_total / serving_area_, 0.0, 1.0) : 0.0;
    s.mean_outstanding = outstanding_area_ / len;
    const double mean_serving = serving_area_ / len;
    s.queue_depth = s.mean_outstanding / std::max(1.0, mean_serving);
  }
  s.completed = completed_;
  s.mean_service_ms = completed_ > 0 ? service_sum_us_ / completed_ / 1000.0 : 0.0;
  window_start_ = now;
  outstanding_area_ = serving_area_ = 0.0;
  completed_ = 0;
  service_sum_us_ = 0.0;
  return s;
}

}  // namespace hilo
