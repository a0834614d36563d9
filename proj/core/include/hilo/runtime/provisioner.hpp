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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hilo/runtime/registry.hpp"

namespace hilo {

/// One monitor reading of a worker pool.
struct MonitorSample {
  std::int64_t t_us = 0;
  std::string pool;
  int replicas = 0;
  int serving = 0;
  std::vector<double> replica_utilization;
  double utilization = 0.0;
  double queue_depth = 0.0;  // outstanding jobs per serving replica
  int queued = 0;
  double throughput = 0.0;   // completed jobs per second
  double latency_ewma_ms = 0.0;
};

nlohmann::json to_json(const MonitorSample& s);

struct AutoscaleConfig {
  int min_replicas = 1;
  int max_replicas = 8;
  double high_water = 1.0;
  double low_water = 0.3;
  int window_samples = 2;  // monitor samples per provisioning decision
  std::int64_t startup_us = 500'000;
};

void validate(const AutoscaleConfig& c);

/// Turns a window of monitor samples into a replica change. The policy's
/// queue depth rules fire on the window mean; the result keeps the replica
/// count inside [min_replicas, max_replicas].
class Provisioner {
 public:
  explicit Provisioner(const AutoscaleConfig& cfg);

  int provision(std::span<const MonitorSample> window, int current_replicas, const Policy& policy) const;
  /// Same, with the configured watermarks as the rules.
  int provision(std::span<const MonitorSample> window, int current_replicas) const;
  const AutoscaleConfig& config() const { return cfg_; }

 private:
  AutoscaleConfig cfg_;
  Policy watermark_policy_;
};

}  // namespace hilo
