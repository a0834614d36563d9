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
#include <optional>

namespace hilo {

struct HeartbeatConfig {
  std::int64_t period_us = 1'000'000;
  int missed_beats = 3;
};

void validate(const HeartbeatConfig& c);

/// Declares the cloud down after `missed_beats` consecutive missed beats and
/// up again on the first beat that arrives.
class HeartbeatDetector {
 public:
  enum class Transition { none, went_down, came_up };

  explicit HeartbeatDetector(const HeartbeatConfig& cfg);

  Transition on_beat(std::int64_t t, bool received);
  bool cloud_up() const { return up_; }
  /// Time the outage was detected, while the cloud is considered down.
  std::optional<std::int64_t> detected_at() const { return detected_at_; }
  const HeartbeatConfig& config() const { return cfg_; }

 private:
  HeartbeatConfig cfg_;
  bool up_ = true;
  int missed_ = 0;
  std::optional<std::int64_t> detected_at_;
};

}  // namespace hilo
