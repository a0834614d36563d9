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

#include <random>

#include <nlohmann/json.hpp>

#include "hilo/coordinator.hpp"

using namespace hilo;

namespace {

Detection det(BBox b, double cls, double loc, std::optional<int> cls_id = 0) {
  Detection d;
  d.bbox = b;
  d.cls_score = cls;
  d.loc_score = loc;
  d.class_id = cls_id;
  return d;
}

double ref_iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Reference filter: each detection is checked against every rule on its own.
FilterResult reference_filter(const std::vector<Detection>& dets, double area, const FilterThresholds& t) {
  FilterResult out;
  for (const auto& d : dets) {
    if (d.cls_score >= t.cls_accept) out.labels.push_back(d);
  }
  for (const auto& d : dets) {
    if (d.cls_score >= t.cls_accept) continue;
    if (d.loc_score < t.loc) continue;
    bool overlaps = false;
    for (const auto& l : out.labels) overlaps = overlaps || ref_iou(d.bbox, l.bbox) > t.iou;
    if (overlaps) continue;
    if (d.bbox.w * d.bbox.h > t.back * area) continue;
    out.uncertain.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("iou of simple boxes") {
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
  CHECK(iou({0, 0, 2, 2}, {5, 5, 2, 2}) == 0.0);
  CHECK(iou({0, 0, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("filter on empty and confident input") {
  const FilterThresholds t;
  auto r = filter_regions({}, 1280 * 720, t);
  CHECK(r.labels.empty());
  CHECK(r.uncertain.empty());
  const std::vector<Detection> one{det({0, 0, 10, 10}, 0.9, 0.95)};
  r = filter_regions(one, 1280 * 720, t);
  CHECK(r.labels == one);
  CHECK(r.uncertain.empty());
  CHECK_THROWS_AS(filter_regions(one, 0.0, t), std::invalid_argument);
}

TEST_CASE("filter drops overlapping and background regions") {
  const double area = 1280.0 * 720.0;
  const double side = std::sqrt(0.5 * area);
  const std::vector<Detection> dets{det({0, 0, 100, 100}, 0.9, 0.95), det({10, 10, 90, 90}, 0.1, 0.7),
                                    det({200, 100, side, side}, 0.0, 0.6, std::nullopt)};
  CHECK(iou(dets[0].bbox, dets[1].bbox) == doctest::Approx(0.81));
  const auto r = filter_regions(dets, area, FilterThresholds{});
  REQUIRE(r.labels.size() == 1);
  CHECK(r.labels[0] == dets[0]);
  CHECK(r.uncertain.empty());
  const auto ref = reference_filter(dets, area, FilterThresholds{});
  CHECK(ref.labels == r.labels);
  CHECK(ref.uncertain == r.uncertain);
}

TEST_CASE("filter keeps order and partitions the input") {
  const std::vector<Detection> dets{det({0, 0, 50, 50}, 0.2, 0.9), det({300, 300, 50, 50}, 0.85, 0.9),
                                    det({600, 300, 40, 40}, 0.1, 0.8), det({0, 0, 40, 40}, 0.1, 0.3)};
  const auto r = filter_regions(dets, 1280 * 720, FilterThresholds{});
  REQUIRE(r.uncertain.size() == 2);
  CHECK(r.uncertain[0] == dets[0]);
  CHECK(r.uncertain[1] == dets[2]);
  CHECK(r.labels.size() == 1);
}

TEST_CASE("filter matches the reference on random instances") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 10);
  const double area = 1280.0 * 720.0;
  for (int n = 0; n < 10000; ++n) {
    FilterThresholds t;
    t.loc = 0.2 + 0.6 * u(rng);
    t.iou = 0.1 + 0.6 * u(rng);
    t.back = 0.1 + 0.5 * u(rng);
    t.cls_accept = 0.5 + 0.45 * u(rng);
    std::vector<Detection> dets;
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      const double w = 10 + 1000 * u(rng), h = 10 + 700 * u(rng);
      dets.push_back(det({(1280 - std::min(w, 1270.0)) * u(rng), (720 - std::min(h, 710.0)) * u(rng), w, h}, u(rng),
                         u(rng)));
    }
    const auto got = filter_regions(dets, area, t);
    const auto want = reference_filter(dets, area, t);
    REQUIRE(got.labels == want.labels);
    REQUIRE(got.uncertain == want.uncertain);
  }
}

TEST_CASE("batcher examples") {
  const BatcherConfig cfg;  // max 8, 20 ms
  std::vector<DynamicBatcher::Item> eight;
  for (int i = 0; i < 8; ++i) eight.push_back({i, 0});
  auto b = DynamicBatcher::schedule(eight, cfg);
  REQUIRE(b.size() == 1);
  CHECK(b[0].dispatch_us == 0);
  CHECK(b[0].items.size() == 8);

  const std::vector<DynamicBatcher::Item> one{{0, 0}};
  b = DynamicBatcher::schedule(one, cfg);
  REQUIRE(b.size() == 1);
  CHECK(b[0].dispatch_us == 20'000);

  std::vector<DynamicBatcher::Item> eleven;
  for (int i = 0; i < 11; ++i) eleven.push_back({i, 0});
  b = DynamicBatcher::schedule(eleven, cfg);
  REQUIRE(b.size() == 2);
  CHECK(b[0].items.size() == 8);
  CHECK(b[0].dispatch_us == 0);
  CHECK(b[1].items.size() == 3);
  CHECK(b[1].dispatch_us == 20'000);
}

TEST_CASE("batcher wait bound on random arrivals") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    BatcherConfig cfg;
    cfg.max_batch = 1 + static_cast<int>(rng() % 10);
    cfg.max_wait_ms = static_cast<double>(rng() % 50);
    std::vector<DynamicBatcher::Item> arrivals;
    std::int64_t t = 0;
    const int n = static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(rng() % 15'000);
      arrivals.push_back({i, t});
    }
    const auto batches = DynamicBatcher::schedule(arrivals, cfg);
    std::int64_t next = 0, last_dispatch = 0;
    for (const auto& b : batches) {
      REQUIRE_FALSE(b.items.empty());
      REQUIRE(static_cast<int>(b.items.size()) <= cfg.max_batch);
      REQUIRE(b.dispatch_us >= last_dispatch);
      last_dispatch = b.dispatch_us;
      for (const auto& item : b.items) {
        REQUIRE(item.id == next++);  // FIFO, nothing lost or repeated
        REQUIRE(b.dispatch_us >= item.arrival_us);
        REQUIRE(b.dispatch_us - item.arrival_us <= std::llround(cfg.max_wait_ms * 1000));
      }
      // A batch leaves early only when it is full.
      if (static_cast<int>(b.items.size()) < cfg.max_batch) {
        REQUIRE(b.dispatch_us == b.items.front().arrival_us + std::llround(cfg.max_wait_ms * 1000));
      }
    }
    REQUIRE(next == n);
  }
}

TEST_CASE("incremental batcher API") {
  DynamicBatcher b(BatcherConfig{2, 10.0});
  CHECK_FALSE(b.deadline());
  CHECK_FALSE(b.push({1, 100}, 100));
  CHECK(*b.deadline() == 10'100);
  CHECK_FALSE(b.on_timer(10'099));
  const auto full = b.push({2, 200}, 200);
  REQUIRE(full);
  CHECK(full->items.size() == 2);
  CHECK(b.queued() == 0);
  CHECK_THROWS(DynamicBatcher(BatcherConfig{0, 1.0}));
}

TEST_CASE("threshold validation") {
  CHECK_NOTHROW(validate(FilterThresholds{}));
  CHECK_THROWS(validate(FilterThresholds{1.5, 0.3, 0.4, 0.8}));
  CHECK_THROWS(validate(FilterThresholds{0.5, 0.3, 0.0, 0.8}));
}

TEST_CASE("trace JSON round trip") {
  ProtocolTrace t;
  t.chunk_id = 4;
  t.stream_id = 2;
  t.scene_index = 1;
  t.cycle = 3;
  t.strategy = "vpaas";
  t.uplink_bytes = 1234;
  t.reference_bytes = 9999;
  t.cloud_invocations = 1;
  t.cloud_frames = 15;
  t.frames = {0, 15, 30};
  t.keyframes = 3;
  t.mark("ready", 10);
  t.mark("done", 20);
  LabelResult l;
  l.frame_index = 15;
  l.bbox = {1, 2, 3, 4};
  l.class_id = 2;
  l.score = 0.75;
  l.source = LabelSource::fog;
  l.timestamp_us = 17;
  t.labels.push_back(l);
  const ProtocolTrace back = trace_from_json(to_json(t));
  CHECK(to_json(back).dump() == to_json(t).dump());
  CHECK(back.labels[0] == l);
}
