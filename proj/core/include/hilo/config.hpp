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

#include <nlohmann/json.hpp>

#include "hilo/coordinator.hpp"
#include "hilo/dataset.hpp"
#include "hilo/learning.hpp"
#include "hilo/oracle.hpp"
#include "hilo/profiler.hpp"
#include "hilo/quality.hpp"
#include "hilo/runtime/failover.hpp"
#include "hilo/runtime/provisioner.hpp"

namespace hilo {

enum class StrategyKind { mpeg, glimpse_like, dds_like, cloudseg_like, vpaas };

std::string to_string(StrategyKind s);
StrategyKind strategy_from_string(const std::string& s);
const std::vector<StrategyKind>& all_strategies();

struct GlimpseParams {
  double diff_threshold = 0.5;  // share of changed objects that triggers a send
  double motion_px = 20.0;      // center displacement counted as a change
};

struct DdsParams {
  double accept = 0.5;  // second-round classification score accepted as a label
};

struct CloudSegParams {
  QualityLevel quality{0.35, 20};
  double upscale = 2.0;
  double recovery_penalty = 0.2;  // added to lambda_r for recovered frames
  double sr_ms_per_frame = 20.0;
  double accept = 0.5;
};

struct LinkConfig {
  double bandwidth_mbps = 10.0;
  double propagation_ms = 20.0;
};

struct OutageConfig {
  double start_s = 0.0;
  std::optional<double> end_s;
};

struct NetworkConfig {
  LinkConfig wan{10.0, 20.0};
  LinkConfig lan{10'000.0, 0.1};
  std::vector<OutageConfig> outages;  // WAN, both directions
};

struct AnnotatorConfig {
  enum class Mode { scripted, external };
  Mode mode = Mode::scripted;
  double delay_ms = 500.0;  // scripted annotator think time
};

struct HitlConfig {
  bool enabled = true;
  LearnerConfig learner;
  double pretrain_scale = 1.0;
  double sample_rate = 0.05;  // share of confident fog labels also sent for review
  int max_tasks_per_chunk = 2;
  bool finalize = false;      // fit ensemble weights once the budget is spent
  int train_batch = 4;        // labels per fog training job
  CostCurve train_cost{20.0, 5.0};
  AnnotatorConfig annotator;
};

struct LoadPhase {
  double start_s = 0.0;
  int cameras = 1;
};

struct WorkloadConfig {
  int cameras = 1;
  std::vector<LoadPhase> phases;  // overrides `cameras` when present
  double duration_s = 0.0;        // 0: play the dataset once
};

struct DatasetRef {
  std::string path;
  std::string id;  // dataset registered with the gateway
  std::optional<DatasetSpec> spec;
  std::uint64_t seed = 1;
};

struct MetricsConfig {
  double iou_match = 0.5;
  bool per_class = true;
  double price_per_frame = 1.0;
  double slo_s = 3.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  enum class Mode { batch, live };
  Mode mode = Mode::batch;
  double pacing = 1.0;  // simulated seconds per wall second in live mode
  StrategyKind strategy = StrategyKind::vpaas;
  DatasetRef dataset;
  ChunkingConfig chunking;
  ProtocolConfig protocol;
  DetectorProfile detector;
  BackupProfile backup;
  FeatureSynthesizer::Config features;
  SizeModel size_model;
  EncodeTimeModel encode_time;
  NetworkConfig network;
  GlimpseParams glimpse;
  DdsParams dds;
  CloudSegParams cloudseg;
  CostCurve fog_classifier{8.0, 2.0};
  int fog_replicas = 1;
  int cloud_replicas = 1;
  AutoscaleConfig autoscale;
  std::string policy = "default";
  HeartbeatConfig heartbeat;
  std::int64_t monitor_period_us = 1'000'000;
  HitlConfig hitl;
  WorkloadConfig workload;
  MetricsConfig metrics;
};

/// One problem with a config document. `field` is a dotted path.
struct ConfigIssue {
  std::string code;  // invalid_type | out_of_range | unknown_field | invalid_value
  std::string field;
  std::string message;
};

nlohmann::json to_json(const ConfigIssue& e);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses and validates a config document; missing fields keep their
/// defaults. Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

nlohmann::json to_json(const DatasetSpec& s);
/// Throws ConfigError.
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

}  // namespace hilo
