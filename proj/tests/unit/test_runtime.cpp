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

#include <doctest.h>

#include "hilo/runtime/failover.hpp"
#include "hilo/runtime/network.hpp"
#include "hilo/runtime/pool.hpp"
#include "hilo/runtime/provisioner.hpp"
#include "hilo/runtime/sim.hpp"

using namespace hilo;

TEST_CASE("simulator runs events in time then scheduling order") {
  Simulator sim;
  std::vector<int> order;
  sim.schedule_at(20, [&] { order.push_back(3); });
  sim.schedule_at(10, [&] { order.push_back(1); });
  sim.schedule_at(10, [&] {
    order.push_back(2);
    sim.schedule_in(0, [&] { order.push_back(25); });
  });
  sim.run();
  CHECK(order == std::vector<int>{1, 2, 25, 3});
  CHECK(sim.now() == 20);
  CHECK_THROWS_AS(sim.schedule_at(5, [] {}), std::logic_error);
}

TEST_CASE("run_until stops at the horizon") {
  Simulator sim;
  int ran = 0;
  sim.schedule_at(5, [&] { ++ran; });
  sim.schedule_at(15, [&] { ++ran; });
  sim.run_until(10);
  CHECK(ran == 1);
  CHECK(sim.now() == 10);
  CHECK(*sim.next_time() == 15);
  CHECK(sim.pending() == 1);
}

TEST_CASE("time conversions") {
  CHECK(seconds_to_us(1.5) == 1'500'000);
  CHECK(ms_to_us(20.0) == 20'000);
  CHECK(us_to_seconds(2'500'000) == 2.5);
}

TEST_CASE("link transfer time") {
  const NetworkLink link("wan", 10e6, 0);
  CHECK(link.transfer_us(1'250'000) == 1'000'000);
  const NetworkLink delayed("wan", 10e6, 20'000);
  CHECK(delayed.transfer_us(0) == 20'000);
  // Linear in bytes.
  CHECK(delayed.transfer_us(2'000'000) - delayed.transfer_us(1'000'000) ==
        delayed.transfer_us(1'000'000) - delayed.transfer_us(0));
  CHECK_THROWS_AS(NetworkLink("x", 0.0, 0), std::invalid_argument);
}

TEST_CASE("outages make the link refuse traffic") {
  NetworkLink link("wan", 10e6, 1000, {Outage{5'000'000, 8'000'000}});
  CHECK(link.is_up(4'999'999));
  CHECK_FALSE(link.is_up(5'000'000));
  CHECK(link.is_up(8'000'000));
  CHECK_THROWS_AS(link.transmit(100, 6'000'000), LinkDown);
  CHECK(link.transmit(0, 9'000'000) == 9'001'000);
  link.add_outage(Outage{10'000'000, std::nullopt});
  CHECK_FALSE(link.is_up(50'000'000));
  link.end_outage(20'000'000);
  CHECK(link.is_up(20'000'000));
  CHECK_FALSE(link.is_up(15'000'000));
}

TEST_CASE("sends queue behind each other") {
  NetworkLink link("wan", 8e6, 0);
  CHECK(link.send(1'000'000, 0) == 1'000'000);
  CHECK(link.send(1'000'000, 0) == 2'000'000);
  CHECK(link.send(1'000'000, 5'000'000) == 6'000'000);
}

TEST_CASE("pool serves FIFO on the lowest idle replica") {
  Simulator sim;
  WorkerPool pool(sim, {"cloud", 2, 0});
  std::vector<std::pair<std::int64_t, std::int64_t>> done;
  for (int i = 0; i < 3; ++i) pool.submit(100, [&](std::int64_t s, std::int64_t e) { done.emplace_back(s, e); });
  CHECK(pool.busy() == 2);
  CHECK(pool.queued() == 1);
  sim.run();
  REQUIRE(done.size() == 3);
  CHECK(done[2] == std::make_pair<std::int64_t, std::int64_t>(100, 200));
  const auto w = pool.take_window();
  CHECK(w.completed == 3);
  CHECK(w.utilization == doctest::Approx(300.0 / 400.0));
  CHECK(w.mean_service_ms == doctest::Approx(0.1));
}

TEST_CASE("new replicas need a startup delay") {
  Simulator sim;
  WorkerPool pool(sim, {"cloud", 1, 500});
  pool.scale_to(3);
  CHECK(pool.replicas() == 3);
  CHECK(pool.serving_replicas() == 1);
  sim.run_until(500);
  CHECK(pool.serving_replicas() == 3);
  pool.scale_to(1);
  CHECK(pool.replicas() == 1);
  CHECK_THROWS_AS(pool.scale_to(-1), std::invalid_argument);
}

TEST_CASE("a retiring replica finishes its job") {
  Simulator sim;
  WorkerPool pool(sim, {"cloud", 2, 0});
  int finished = 0;
  pool.submit(1000, [&](std::int64_t, std::int64_t) { ++finished; });
  pool.submit(1000, [&](std::int64_t, std::int64_t) { ++finished; });
  pool.scale_to(1);
  sim.run();
  CHECK(finished == 2);
  CHECK(pool.replicas() == 1);
}

TEST_CASE("queue depth is outstanding work per serving replica") {
  Simulator sim;
  WorkerPool pool(sim, {"cloud", 1, 0});
  for (int i = 0; i < 4; ++i) pool.submit(1000, [](std::int64_t, std::int64_t) {});
  sim.run_until(4000);
  const auto w = pool.take_window();
  // Outstanding 4,3,2,1 for 1000us each.
  CHECK(w.mean_outstanding == doctest::Approx(2.5));
  CHECK(w.queue_depth == doctest::Approx(2.5));
}

namespace {
std::vector<MonitorSample> window_of(std::initializer_list<double> depths) {
  std::vector<MonitorSample> w;
  for (double d : depths) {
    MonitorSample s;
    s.queue_depth = d;
    w.push_back(s);
  }
  return w;
}
}  // namespace

TEST_CASE("provisioner follows watermarks within bounds") {
  AutoscaleConfig cfg;
  cfg.max_replicas = 3;
  const Provisioner p(cfg);
  CHECK(p.provision(window_of({0.1, 0.1}), 1) == 0);  // floor
  CHECK(p.provision(window_of({2.0, 3.0}), 1) == 1);
  CHECK(p.provision(window_of({2.0, 3.0}), 3) == 0);  // ceiling
  CHECK(p.provision(window_of({0.1, 0.2}), 3) == -1);
  CHECK(p.provision(window_of({0.5, 0.8}), 2) == 0);  // inside the band
  CHECK(p.provision(window_of({}), 2) == 0);
}

TEST_CASE("oscillating load inside the band never changes replicas") {
  const Provisioner p(AutoscaleConfig{});
  int replicas = 2;
  for (int i = 0; i < 100; ++i) {
    const double d = 0.35 + 0.6 * (i % 2);
    replicas += p.provision(window_of({d, 0.95 - (d - 0.35)}), replicas);
  }
  CHECK(replicas == 2);
}

TEST_CASE("autoscale config validation") {
  AutoscaleConfig c;
  c.min_replicas = 0;
  CHECK_THROWS_AS(validate(c), InvariantError);
  c = {};
  c.high_water = 0.2;
  CHECK_THROWS_AS(validate(c), InvariantError);
  c = {};
  c.max_replicas = 0;
  CHECK_THROWS_AS(validate(c), InvariantError);
}

TEST_CASE("heartbeat detects an outage after the missed beats") {
  HeartbeatDetector hb(HeartbeatConfig{});
  using T = HeartbeatDetector::Transition;
  // Link dies at 25 s; beats at 25, 26 and 27 are missed.
  for (int t = 1; t < 25; ++t) CHECK(hb.on_beat(seconds_to_us(t), true) == T::none);
  CHECK(hb.on_beat(seconds_to_us(25), false) == T::none);
  CHECK(hb.on_beat(seconds_to_us(26), false) == T::none);
  CHECK(hb.on_beat(seconds_to_us(27), false) == T::went_down);
  CHECK_FALSE(hb.cloud_up());
  CHECK(*hb.detected_at() == seconds_to_us(27));
  CHECK(hb.on_beat(seconds_to_us(28), false) == T::none);
  CHECK(hb.on_beat(seconds_to_us(29), true) == T::came_up);
  CHECK(hb.cloud_up());
}

TEST_CASE("a single missed beat is not an outage") {
  HeartbeatDetector hb(HeartbeatConfig{});
  using T = HeartbeatDetector::Transition;
  for (int i = 0; i < 10; ++i) {
    CHECK(hb.on_beat(i * 2, false) == T::none);
    CHECK(hb.on_beat(i * 2 + 1, true) == T::none);
  }
  CHECK(hb.cloud_up());
  CHECK_THROWS_AS(HeartbeatDetector(HeartbeatConfig{0, 3}), InvariantError);
}
