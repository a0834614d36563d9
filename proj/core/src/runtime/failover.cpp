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

#include "hilo/runtime/failover.hpp"

#include "hilo/datamodel.hpp"

namespace hilo {

void validate(const HeartbeatConfig& c) {
  if (c.period_us <= 0) throw InvariantError("heartbeat.period must be > 0");
  if (c.missed_beats < 1) throw InvariantError("heartbeat.missed_beats must be >= 1");
}

HeartbeatDetector::HeartbeatDetector(const HeartbeatConfig& cfg) : cfg_(cfg) { validate(cfg); }

HeartbeatDetector::Transition HeartbeatDetector::on_beat(std::int64_t t, bool received) {
  if (received) {
    missed_ = 0;
    if (!up_) {
      up_ = true;
      detected_at_.reset();
      return Transition::came_up;
    }
    return Transition::none;
  }
  ++missed_;
  if (up_ && missed_ >= cfg_.missed_beats) {
    up_ = false;
    detected_at_ = t;
    return Transition::went_down;
  }
  return Transition::none;
}

}  // namespace hilo
