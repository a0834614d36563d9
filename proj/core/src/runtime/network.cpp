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

#include "hilo/runtime/network.hpp"

#include <algorithm>
#include <cmath>

namespace hilo {

NetworkLink::NetworkLink(std::string name, double bandwidth_bps, std::int64_t propagation_us,
                         std::vector<Outage> outages)
    : name_(std::move(name)), bandwidth_bps_(bandwidth_bps), propagation_us_(propagation_us) {
  if (!(bandwidth_bps > 0.0)) throw std::invalid_argument(name_ + ": bandwidth must be > 0");
  if (propagation_us < 0) throw std::invalid_argument(name_ + ": propagation delay must be >= 0");
  for (const Outage& o : outages) add_outage(o);
}

bool NetworkLink::is_up(std::int64_t t) const {
  for (const Outage& o : outages_) {
    if (t >= o.start_us && (!o.end_us || t < *o.end_us)) return false;
  }
  return true;
}

std::int64_t NetworkLink::transfer_us(std::int64_t bytes) const {
  if (bytes < 0) throw std::invalid_argument("negative byte count");
  return propagation_us_ + std::llround(static_cast<double>(bytes) * 8.0 * 1e6 / bandwidth_bps_);
}

std::int64_t NetworkLink::transmit(std::int64_t bytes, std::int64_t now) const {
  if (!is_up(now)) throw LinkDown(name_ + " is down at t=" + std::to_string(now) + "us");
  return now + transfer_us(bytes);
}

std::int64_t NetworkLink::send(std::int64_t bytes, std::int64_t now) {
  if (!is_up(now)) throw LinkDown(name_ + " is down at t=" + std::to_string(now) + "us");
  const std::int64_t start = std::max(now, busy_until_);
  const std::int64_t wire = transfer_us(bytes) - propagation_us_;
  busy_until_ = start + wire;
  return busy_until_ + propagation_us_;
}

void NetworkLink::add_outage(const Outage& o) {
  if (o.start_us < 0 || (o.end_us && *o.end_us < o.start_us)) {
    throw std::invalid_argument(name_ + ": outage must satisfy 0 <= start <= end");
  }
  outages_.push_back(o);
}

void NetworkLink::end_outage(std::int64_t t) {
  for (Outage& o : outages_) {
    if (!o.end_us && o.start_us <= t) o.end_us = t;
  }
}

}  // namespace hilo
