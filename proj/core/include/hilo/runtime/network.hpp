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
#include <stdexcept>
#include <string>
#include <vector>

namespace hilo {

class LinkDown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// [start, end) in simulated microseconds; an open outage has no end.
struct Outage {
  std::int64_t start_us = 0;
  std::optional<std::int64_t> end_us;
};

/// Point-to-point link with fixed bandwidth and propagation delay.
class NetworkLink {
 public:
  NetworkLink(std::string name, double bandwidth_bps, std::int64_t propagation_us,
              std::vector<Outage> outages = {});

  const std::string& name() const { return name_; }
  double bandwidth_bps() const { return bandwidth_bps_; }
  std::int64_t propagation_us() const { return propagation_us_; }
  const std::vector<Outage>& outages() const { return outages_; }

  bool is_up(std::int64_t t) const;
  /// Serialization time of `bytes` plus propagation delay.
  std::int64_t transfer_us(std::int64_t bytes) const;
  /// Arrival time of `bytes` sent at `now`. Throws LinkDown during an outage.
  std::int64_t transmit(std::int64_t bytes, std::int64_t now) const;

  /// Like transmit, but transfers queue behind each other on the wire.
  std::int64_t send(std::int64_t bytes, std::int64_t now);

  void add_outage(const Outage& o);
  /// Closes every outage still open at `t`.
  void end_outage(std::int64_t t);

 private:
  std::string name_;
  double bandwidth_bps_;
  std::int64_t propagation_us_;
  std::vector<Outage> outages_;
  std::int64_t busy_until_ = 0;
};

}  // namespace hilo
