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

#include "hilo/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hilo {

using nlohmann::json;

void validate(const FilterThresholds& t) {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(t.loc) || !open_unit(t.iou) || !open_unit(t.back) || !open_unit(t.cls_accept)) {
    throw InvariantError("filter thresholds must lie in (0,1)");
  }
}

void validate(const BatcherConfig& b) {
  if (b.max_batch < 1) throw InvariantError("batcher.max_batch must be >= 1");
  if (b.max_wait_ms < 0.0) throw InvariantError("batcher.max_wait_ms must be >= 0");
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

FilterResult filter_regions(std::span<const Detection> dets, double frame_area, const FilterThresholds& t) {
  if (!(frame_area > 0.0)) throw std::invalid_argument("frame_area must be > 0");
  FilterResult out;
  std::vector<const Detection*> candidates;
  for (const Detection& d : dets) {
    if (d.cls_score >= t.cls_accept) {
      out.labels.push_back(d);
    } else if (d.loc_score >= t.loc) {
      candidates.push_back(&d);
    }
  }
  for (const Detection* d : candidates) {
    double overlap = 0.0;
    for (const Detection& l : out.labels) overlap = std::max(overlap, iou(d->bbox, l.bbox));
    if (overlap > t.iou) continue;
    if (d->bbox.area() / frame_area > t.back) continue;
    out.uncertain.push_back(*d);
  }
  return out;
}

DynamicBatcher::DynamicBatcher(const BatcherConfig& cfg)
    : cfg_(cfg), max_wait_us_(std::llround(cfg.max_wait_ms * 1000.0)) {
  validate(cfg);
}

DynamicBatcher::Batch DynamicBatcher::take(std::int64_t now) {
  Batch b;
  b.dispatch_us = now;
  const std::size_t n = std::min<std::size_t>(queue_.size(), static_cast<std::size_t>(cfg_.max_batch));
  b.items.assign(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n));
  queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n));
  return b;
}

std::optional<DynamicBatcher::Batch> DynamicBatcher::push(const Item& item, std::int64_t now) {
  queue_.push_back(item);
  if (static_cast<int>(queue_.size()) >= cfg_.max_batch) return take(now);
  return std::nullopt;
}

std::optional<std::int64_t> DynamicBatcher::deadline() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.front().arrival_us + max_wait_us_;
}

std::optional<DynamicBatcher::Batch> DynamicBatcher::on_timer(std::int64_t now) {
  auto d = deadline();
  if (!d || *d > now) return std::nullopt;
  return take(now);
}

std::vector<DynamicBatcher::Batch> DynamicBatcher::schedule(std::span<const Item> arrivals,
                                                            const BatcherConfig& cfg) {
  DynamicBatcher batcher(cfg);
  std::vector<Batch> out;
  std::size_t i = 0;
  while (i < arrivals.size() || batcher.queued() > 0) {
    auto d = batcher.deadline();
    if (i < arrivals.size() && (!d || arrivals[i].arrival_us <= *d)) {
      if (i > 0 && arrivals[i].arrival_us < arrivals[i - 1].arrival_us) {
        throw std::invalid_argument("arrivals must be sorted");
      }
      if (auto b = batcher.push(arrivals[i], arrivals[i].arrival_us)) out.push_back(std::move(*b));
      ++i;
    } else if (auto b = batcher.on_timer(*d)) {
      out.push_back(std::move(*b));
    }
  }
  return out;
}

json to_json(const LabelResult& l) {
  return json{{"frame", l.frame_index},
              {"bbox", {l.bbox.x, l.bbox.y, l.bbox.w, l.bbox.h}},
              {"class", l.class_id},
              {"score", l.score},
              {"source", to_string(l.source)},
              {"t_us", l.timestamp_us}};
}

LabelResult label_from_json(const json& j) {
  LabelResult l;
  l.frame_index = j.at("frame").get<std::int64_t>();
  const json& b = j.at("bbox");
  l.bbox = BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
  l.class_id = j.at("class").get<int>();
  l.score = j.at("score").get<double>();
  l.source = label_source_from_string(j.at("source").get<std::string>());
  l.timestamp_us = j.at("t_us").get<std::int64_t>();
  return l;
}

json to_json(const ProtocolTrace& t) {
  json stages = json::array();
  for (const auto& [name, at] : t.stages) stages.push_back({{"stage", name}, {"t_us", at}});
  json labels = json::array();
  for (const LabelResult& l : t.labels) labels.push_back(to_json(l));
  return json{{"chunk_id", t.chunk_id},
              {"stream_id", t.stream_id},
              {"scene", t.scene_index},
              {"cycle", t.cycle},
              {"strategy", t.strategy},
              {"path", t.path},
              {"state", t.state},
              {"ready_us", t.ready_us},
              {"done_us", t.done_us},
              {"bytes", {{"local", t.local_bytes}, {"uplink", t.uplink_bytes}, {"downlink", t.downlink_bytes},
                         {"reference", t.reference_bytes}}},
              {"cloud_invocations", t.cloud_invocations},
              {"cloud_frames", t.cloud_frames},
              {"wasted_cloud_frames", t.wasted_cloud_frames},
              {"keyframes", t.keyframes},
              {"frames", t.frames},
              {"uncertain_regions", t.uncertain_regions},
              {"attempts", t.attempts},
              {"stages", std::move(stages)},
              {"labels", std::move(labels)}};
}

ProtocolTrace trace_from_json(const json& j) {
  ProtocolTrace t;
  t.chunk_id = j.at("chunk_id").get<std::int64_t>();
  t.stream_id = j.at("stream_id").get<int>();
  t.scene_index = j.at("scene").get<int>();
  t.cycle = j.at("cycle").get<int>();
  t.strategy = j.at("strategy").get<std::string>();
  t.path = j.at("path").get<std::string>();
  t.state = j.at("state").get<std::string>();
  t.ready_us = j.at("ready_us").get<std::int64_t>();
  t.done_us = j.at("done_us").get<std::int64_t>();
  t.local_bytes = j.at("bytes").at("local").get<std::int64_t>();
  t.uplink_bytes = j.at("bytes").at("uplink").get<std::int64_t>();
  t.downlink_bytes = j.at("bytes").at("downlink").get<std::int64_t>();
  t.reference_bytes = j.at("bytes").at("reference").get<std::int64_t>();
  t.cloud_invocations = j.at("cloud_invocations").get<int>();
  t.cloud_frames = j.at("cloud_frames").get<std::int64_t>();
  t.wasted_cloud_frames = j.at("wasted_cloud_frames").get<std::int64_t>();
  t.keyframes = j.at("keyframes").get<int>();
  t.frames = j.at("frames").get<std::vector<std::int64_t>>();
  t.uncertain_regions = j.at("uncertain_regions").get<int>();
  t.attempts = j.at("attempts").get<int>();
  for (const json& s : j.at("stages")) {
    t.stages.emplace_back(s.at("stage").get<std::string>(), s.at("t_us").get<std::int64_t>());
  }
  for (const json& l : j.at("labels")) t.labels.push_back(label_from_json(l));
  return t;
}

}  // namespace hilo
