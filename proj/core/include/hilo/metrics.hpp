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
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/coordinator.hpp"
#include "hilo/datamodel.hpp"

namespace hilo {

struct MatchConfig {
  double iou_threshold = 0.5;
  bool per_class = true;
};

struct FrameMatch {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (label, object)
};

/// Greedy matching in descending label score (ties keep input order). A
/// label takes the unmatched object it overlaps most, if the overlap reaches
/// the threshold and, with per_class, the classes agree.
FrameMatch match_frame(std::span<const LabelResult> labels, std::span<const GroundTruthObject> objects,
                       const MatchConfig& cfg);

struct Accuracy {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Accuracy accuracy_from_counts(int tp, int fp, int fn);

/// F1 over a set of frames; labels are grouped by frame index.
Accuracy f1_score(std::span<const LabelResult> labels, std::span<const Frame> frames, const MatchConfig& cfg);

struct Bandwidth {
  double bytes_per_s = 0.0;
  double normalized = 0.0;  // uplink bytes over the original-video bytes
  std::int64_t uplink_bytes = 0;
  std::int64_t reference_bytes = 0;
  std::int64_t downlink_bytes = 0;
};

/// Throws std::invalid_argument when duration_s <= 0.
Bandwidth bandwidth(std::span<const ProtocolTrace> traces, double duration_s);

/// Price times frames processed by cloud models, failed attempts included.
double cloud_cost(std::span<const ProtocolTrace> traces, double price_per_frame);
std::int64_t cloud_frames(std::span<const ProtocolTrace> traces);

struct Percentiles {
  int count = 0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double mean = 0.0;
};

/// Linear interpolation between closest ranks.
double percentile(std::vector<double> sorted_or_not, double p);
Percentiles summarize(std::vector<double> values);

struct Freshness {
  Percentiles latency_s;
  int labeled_objects = 0;
  int unlabeled_objects = 0;
  std::vector<double> per_object_s;
};

/// Time from an object's first appearance on its stream to its first
/// correct label. Objects present before a stream's first streamed chunk
/// are counted from that chunk's first keyframe.
Freshness freshness_latency(std::span<const ProtocolTrace> traces, std::span<const Scene> scenes,
                            const MatchConfig& cfg);

struct MetricsOptions {
  std::string strategy;
  MatchConfig match;
  double price_per_frame = 1.0;
  double duration_s = 0.0;  // 0: span of the streamed video
};

struct ChunkPoint {
  std::int64_t chunk_id = 0;
  int stream_id = 0;
  std::string path;
  double ready_s = 0.0;
  double done_s = 0.0;
  double normalized_bandwidth = 0.0;
  Accuracy accuracy;
  double cost = 0.0;
  double latency_s = 0.0;
  int labels_backup = 0;
};

struct MetricsReport {
  std::string strategy;
  int chunks = 0;
  double duration_s = 0.0;
  Bandwidth bw;
  Accuracy accuracy;
  double price_per_frame = 0.0;
  std::int64_t cloud_frames = 0;
  int cloud_invocations = 0;
  double cost = 0.0;
  Freshness freshness;
  Percentiles response_s;
  std::vector<ChunkPoint> series;
  nlohmann::json extra = nlohmann::json::object();
};

/// Groundtruth comes from `scenes`; traces name their scene and keyframes.
MetricsReport compute_metrics(std::span<const ProtocolTrace> traces, std::span<const Scene> scenes,
                              const MetricsOptions& opts);

nlohmann::json to_json(const Accuracy& a);
nlohmann::json to_json(const Percentiles& p);
nlohmann::json to_json(const MetricsReport& r);

/// Fixed-width table with one row per metrics JSON document.
std::string comparison_table(const std::vector<nlohmann::json>& reports);

}  // namespace hilo
