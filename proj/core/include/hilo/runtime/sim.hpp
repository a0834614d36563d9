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
#include <functional>
#include <optional>
#include <queue>
#include <vector>

namespace hilo {

/// Discrete-event loop on an integer microsecond clock. Events at the same
/// time run in scheduling order, so a run is a pure function of its inputs.
class Simulator {
 public:
  using Event = std::function<void()>;

  std::int64_t now() const { return now_; }

  void schedule_at(std::int64_t t, Event fn);
  void schedule_in(std::int64_t dt, Event fn) { schedule_at(now_ + dt, std::move(fn)); }

  /// Runs the next event; false when the queue is empty.
  bool step();
  void run();
  /// Runs every event due at or before `t`, then advances the clock to `t`.
  void run_until(std::int64_t t);
  std::size_t pending() const { return queue_.size(); }
  std::optional<std::int64_t> next_time() const;

 private:
  struct Entry {
    std::int64_t t;
    std::uint64_t seq;
    Event fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const { return a.t != b.t ? a.t > b.t : a.seq > b.seq; }
  };

  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

inline constexpr std::int64_t kUsPerSecond = 1'000'000;

inline std::int64_t seconds_to_us(double s) { return static_cast<std::int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5)); }
inline std::int64_t ms_to_us(double ms) { return seconds_to_us(ms / 1000.0); }
inline double us_to_seconds(std::int64_t us) { return static_cast<double>(us) / 1e6; }

}  // namespace hilo
