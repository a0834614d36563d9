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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hilo/config.hpp"
#include "hilo/coordinator.hpp"
#include "hilo/dataset.hpp"
#include "hilo/learning.hpp"
#include "hilo/oracle.hpp"
#include "hilo/profiler.hpp"
#include "hilo/runtime/network.hpp"
#include "hilo/runtime/pool.hpp"
#include "hilo/runtime/registry.hpp"
#include "hilo/runtime/sim.hpp"

namespace hilo {

class CloudUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One chunk of one camera, placed on the simulation timeline.
struct ChunkJob {
  std::int64_t job_id = 0;
  int stream_id = 0;
  int cycle = 0;
  const Scene* scene = nullptr;
  const SceneChunk* chunk = nullptr;
  std::int64_t ready_us = 0;  // absolute time the chunk leaves the camera
  /// Trace of earlier failed attempts; bytes and wasted cloud work carry over.
  std::optional<ProtocolTrace> prior;
};

/// A region the fog classifier was unsure about, or sampled for review.
struct ReviewCandidate {
  std::int64_t job_id = 0;
  const Frame* frame = nullptr;
  BBox region;
  Eigen::VectorXd feature;
  int predicted_class = 0;
  double score = 0.0;
};

struct ChunkResult {
  ProtocolTrace trace;
  std::vector<ReviewCandidate> review;
};

using DoneFn = std::function<void(ChunkResult)>;
/// Receives the partial trace of an attempt that lost the cloud.
using FailFn = std::function<void(ProtocolTrace)>;

inline constexpr const char* kFogClassifier = "fog-classifier";
inline constexpr const char* kCloudDetector = "cloud-detector";
inline constexpr const char* kBackupDetector = "backup-detector";
inline constexpr const char* kFogTrainer = "fog-trainer";

/// Devices, links and models of one experiment, all on one simulated clock.
class SimEnv {
 public:
  explicit SimEnv(const ExperimentConfig& cfg, int classes);
  SimEnv(const SimEnv&) = delete;
  SimEnv& operator=(const SimEnv&) = delete;

  const ExperimentConfig& config() const { return cfg_; }

  /// Seed of everything derived from a chunk's content, shared by all
  /// strategies so they see identical detector behavior.
  std::uint64_t content_seed(const ChunkJob& job) const;
  std::uint64_t feature_seed(const ChunkJob& job) const;

  /// Queues a feature vector for the fog classifier; `done` gets the
  /// prediction and the time the batch finished.
  void classify(Eigen::VectorXd x, std::function<void(const Prediction&, std::int64_t)> done);
  std::int64_t classifier_latency_us(int batch) const;

  Simulator sim;
  NetworkLink lan;
  NetworkLink wan_up;
  NetworkLink wan_down;
  WorkerPool cloud_pool;
  WorkerPool fog_pool;
  ModelZoo zoo;
  FunctionRegistry functions;
  FeatureSynthesizer synth;
  LearnerState learner;

 private:
  struct Pending {
    Eigen::VectorXd x;
    std::function<void(const Prediction&, std::int64_t)> done;
  };
  void dispatch(DynamicBatcher::Batch batch);
  void arm_timer();

  ExperimentConfig cfg_;
  DynamicBatcher batcher_;
  std::map<std::int64_t, Pending> pending_;
  std::int64_t next_item_ = 0;
  std::optional<std::int64_t> timer_at_;
};

/// Starts `strategy` on `job` at the job's ready time (or now, if later).
void start_chunk(SimEnv& env, StrategyKind strategy, const ChunkJob& job, DoneFn done, FailFn fail);
/// Fog-only fallback: the backup detector on the original chunk.
void start_backup(SimEnv& env, StrategyKind strategy, const ChunkJob& job, DoneFn done);

/// Synchronous forms: run the simulator until the chunk is done.
/// Throw CloudUnavailable if the cloud cannot be reached.
ChunkResult run_chunk(SimEnv& env, StrategyKind strategy, const ChunkJob& job);
ChunkResult run_backup(SimEnv& env, StrategyKind strategy, const ChunkJob& job);

}  // namespace hilo
