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

#include "hilo/runtime/provisioner.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace hilo {

nlohmann::json to_json(const MonitorSample& s) {
  return nlohmann::json{{"t_us", s.t_us},
                        {"pool", s.pool},
                        {"replicas", s.replicas},
                        {"serving", s.serving},
                        {"replica_utilization", s.replica_utilization},
                        {"utilization", s.utilization},
                        {"queue_depth", s.queue_depth},
                        {"queued", s.queued},
                        {"throughput", s.throughput},
                        {"latency_ewma_ms", s.latency_ewma_ms}};
}

void validate(const AutoscaleConfig& c) {
  if (c.min_replicas < 1) throw InvariantError("autoscale.min_replicas must be >= 1");
  if (c.max_replicas < c.min_replicas) throw InvariantError("autoscale.max_replicas must be >= min_replicas");
  if (!(c.high_water > c.low_water) || c.low_water < 0) {
    throw InvariantError("autoscale.high_water must exceed autoscale.low_water >= 0");
  }
  if (c.window_samples < 1) throw InvariantError("autoscale.window_samples must be >= 1");
  if (c.startup_us < 0) throw InvariantError("autoscale.startup must be >= 0");
}

Provisioner::Provisioner(const AutoscaleConfig& cfg) : cfg_(cfg) {
  validate(cfg);
  watermark_policy_ = Policy{"watermarks",
                             {{Trigger::queue_depth_above, cfg.high_water, Action::scale_up},
                              {Trigger::queue_depth_below, cfg.low_water, Action::scale_down}},
                             Action::hold};
}

int Provisioner::provision(std::span<const MonitorSample> window, int current, const Policy& policy) const {
  if (window.empty()) return 0;
  double depth = 0.0;
  for (const MonitorSample& s : window) depth += s.queue_depth;
  depth /= static_cast<double>(window.size());
  PolicyContext ctx;
  ctx.queue_depth = depth;
  const int target = std::clamp(current + decide(policy, ctx).scale, cfg_.min_replicas, cfg_.max_replicas);
  return target - current;
}

int Provisioner::provision(std::span<const MonitorSample> window, int current) const {
  return provision(window, current, watermark_policy_);
}

}  // namespace hilo
