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

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "hilo/runtime/sim.hpp"

namespace hilo {

/// Replicas of one function on one device class. Jobs are served FIFO by
/// the lowest-numbered idle replica. New replicas take `startup_us` before
/// they accept work; removed replicas finish their current job first.
class WorkerPool {
 public:
  struct Config {
    std::string name;
    int replicas = 1;
    std::int64_t startup_us = 500'000;
  };

  /// Called when a job finishes, with its start and end time.
  using Done = std::function<void(std::int64_t start_us, std::int64_t end_us)>;

  struct WindowStats {
    std::int64_t start_us = 0;
    std::int64_t end_us = 0;
    std::vector<double> replica_utilization;  // serving replicas only
    double utilization = 0.0;                 // busy time / replica time
    double mean_outstanding = 0.0;            // queued + running jobs, time average
    double queue_depth = 0.0;                 // mean_outstanding per serving replica
    int completed = 0;
    double mean_service_ms = 0.0;
  };

  WorkerPool(Simulator& sim, Config cfg);
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  const std::string& name() const { return cfg_.name; }
  void submit(std::int64_t service_us, Done done);

  /// Target replica count, including replicas still starting up.
  int replicas() const;
  int serving_replicas() const;
  int busy() const;
  std::size_t queued() const { return queue_.size(); }
  void scale_to(int n);

  /// Statistics since the previous call, which starts a new window.
  WindowStats take_window();

 private:
  struct Job {
    std::int64_t service_us;
    Done done;
  };
  struct Replica {
    bool serving = false;
    bool retiring = false;
    bool busy = false;
    std::int64_t busy_since = 0;
    double busy_acc = 0.0;  // within the current window
    std::uint64_t generation = 0;
  };

  void accumulate();
  void dispatch();
  void finish(std::size_t idx, std::int64_t start, Done done);
  void activate(std::size_t idx, std::uint64_t generation);
  void compact();

  Simulator& sim_;
  Config cfg_;
  std::vector<Replica> replicas_;
  std::deque<Job> queue_;
  std::uint64_t generation_ = 0;

  std::int64_t window_start_ = 0;
  std::int64_t last_change_ = 0;
  double outstanding_area_ = 0.0;
  double serving_area_ = 0.0;
  int completed_ = 0;
  double service_sum_us_ = 0.0;
};

}  // namespace hilo
