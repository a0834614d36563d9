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

#include "hilo/runtime/sim.hpp"

#include <stdexcept>
#include <string>

namespace hilo {

void Simulator::schedule_at(std::int64_t t, Event fn) {
  if (t < now_) {
    throw std::logic_error("event scheduled in the past: " + std::to_string(t) + " < " + std::to_string(now_));
  }
  queue_.push(Entry{t, seq_++, std::move(fn)});
}

bool Simulator::step() {
  if (queue_.empty()) return false;
  // Copy out before pop: the handler may schedule more events.
  Entry e = queue_.top();
  queue_.pop();
  now_ = e.t;
  e.fn();
  return true;
}

void Simulator::run() {
  while (step()) {
  }
}

void Simulator::run_until(std::int64_t t) {
  while (!queue_.empty() && queue_.top().t <= t) step();
  if (t > now_) now_ = t;
}

std::optional<std::int64_t> Simulator::next_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().t;
}

}  // namespace hilo
