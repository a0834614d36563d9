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
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hilo/datamodel.hpp"

namespace hilo {

struct FilterThresholds {
  double loc = 0.5;         // minimum location confidence of an uncertain region
  double iou = 0.3;         // maximum overlap with an accepted label
  double back = 0.4;        // maximum share of the frame area
  double cls_accept = 0.8;  // classification confidence accepted as a label

  bool operator==(const FilterThresholds&) const = default;
};

void validate(const FilterThresholds& t);

struct BatcherConfig {
  int max_batch = 8;
  double max_wait_ms = 20.0;
};

void validate(const BatcherConfig& b);

/// Settings of the high/low streaming protocol.
struct ProtocolConfig {
  QualityLevel low_quality{0.8, 36};
  QualityLevel high_quality{0.8, 26};
  FilterThresholds thresholds;
  BatcherConfig batcher;
  /// Fog classifier score needed to emit a label; weaker regions go to
  /// the annotation queue instead.
  double fog_accept = 0.5;
  /// Wire cost of one returned box.
  int bytes_per_region = 16;
};

double iou(const BBox& a, const BBox& b);

struct FilterResult {
  std::vector<Detection> labels;
  std::vector<Detection> uncertain;
};

/// Splits cloud detections into confident labels and uncertain regions.
/// Uncertain regions pass three stages in this order: location confidence
/// >= loc, max IoU against labels <= iou, area share <= back.
FilterResult filter_regions(std::span<const Detection> dets, double frame_area, const FilterThresholds& t);

/// Groups regions into batches for the fog classifier. A batch leaves when it
/// reaches max_batch or when its oldest member has waited max_wait.
class DynamicBatcher {
 public:
  struct Item {
    std::int64_t id = 0;
    std::int64_t arrival_us = 0;
  };
  struct Batch {
    std::int64_t dispatch_us = 0;
    std::vector<Item> items;
  };

  explicit DynamicBatcher(const BatcherConfig& cfg);

  /// Adds an item at `now`; returns the batch it completes, if any.
  std::optional<Batch> push(const Item& item, std::int64_t now);
  /// Time the oldest queued item must leave, if anything is queued.
  std::optional<std::int64_t> deadline() const;
  /// Releases the queued items when their deadline has passed.
  std::optional<Batch> on_timer(std::int64_t now);
  std::size_t queued() const { return queue_.size(); }

  /// Offline schedule of a whole arrival sequence (sorted by arrival).
  static std::vector<Batch> schedule(std::span<const Item> arrivals, const BatcherConfig& cfg);

 private:
  Batch take(std::int64_t now);

  BatcherConfig cfg_;
  std::int64_t max_wait_us_;
  std::deque<Item> queue_;
};

/// Everything one chunk did on its way through a strategy.
struct ProtocolTrace {
  std::int64_t chunk_id = 0;
  int stream_id = 0;
  int scene_index = 0;
  int cycle = 0;  // how many times the stream has wrapped around the dataset
  std::string strategy;
  std::string path = "cloud";  // cloud | backup
  std::string state = "labeled";  // labeled | labeled_by_backup
  std::int64_t ready_us = 0;
  std::int64_t done_us = 0;
  std::int64_t local_bytes = 0;     // client -> fog, local network
  std::int64_t uplink_bytes = 0;    // video sent to the cloud
  std::int64_t downlink_bytes = 0;  // boxes returned by the cloud
  /// What sending the original chunk would have cost; the bandwidth baseline.
  std::int64_t reference_bytes = 0;
  int cloud_invocations = 0;
  std::int64_t cloud_frames = 0;  // frames processed by cloud models, summed over invocations
  /// Cloud frames of earlier attempts whose results never made it back.
  std::int64_t wasted_cloud_frames = 0;
  std::vector<std::int64_t> frames;  // keyframe indices within the scene
  int keyframes = 0;
  int uncertain_regions = 0;
  int attempts = 1;
  std::vector<std::pair<std::string, std::int64_t>> stages;
  std::vector<LabelResult> labels;

  void mark(const std::string& stage, std::int64_t t) { stages.emplace_back(stage, t); }
};

nlohmann::json to_json(const LabelResult& l);
LabelResult label_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProtocolTrace& t);
ProtocolTrace trace_from_json(const nlohmann::json& j);

}  // namespace hilo
