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
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hilo/datamodel.hpp"
#include "hilo/quality.hpp"

namespace hilo {

/// Parameters of the synthetic annotated stream generator.
struct DatasetSpec {
  int scenes = 1;
  int frames = 900;
  int width = 1280;
  int height = 720;
  int classes = 10;
  double fps = 30.0;
  double objects_per_frame = 5.0;
  int min_lifetime = 60;  // frames
  int max_lifetime = 600;
  double min_size = 40.0;  // pixels, shorter box side
  double max_size = 160.0;
  double max_speed = 2.0;  // pixels per frame
  double min_difficulty = 0.0;
  double max_difficulty = 0.1;
  double drift_rate = 0.0;  // drift_phase units per frame
};

void validate(const DatasetSpec& spec);

class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Pure function of (spec, seed): objects spawn at a steady rate, move on
/// straight lines reflected at the frame border and live for a bounded
/// number of frames.
std::vector<Scene> generate_dataset(const DatasetSpec& spec, std::uint64_t seed);

std::vector<Scene> load_dataset(const std::string& path);
std::vector<Scene> read_dataset(std::istream& in);
void save_dataset(const std::string& path, const std::vector<Scene>& scenes);
void write_dataset(std::ostream& out, const std::vector<Scene>& scenes);

struct ChunkingConfig {
  int keyframe_interval = 15;
  int keyframes_per_chunk = 15;
};

/// A chunk of one scene plus the timing facts the simulator needs.
struct SceneChunk {
  int scene_index = 0;
  VideoChunk chunk;
  /// Capture time of every keyframe relative to the scene start.
  std::vector<std::int64_t> keyframe_time_us;
  /// Time the last keyframe was captured; the chunk leaves the camera then.
  std::int64_t ready_us = 0;
};

/// Samples one keyframe every `keyframe_interval` frames and packs
/// `keyframes_per_chunk` of them per chunk. The final chunk may be short.
/// Chunk ids continue from `first_chunk_id`.
std::vector<SceneChunk> make_chunks(const Scene& scene, int scene_index, const ChunkingConfig& cfg,
                                    const SizeModel& size_model,
                                    std::int64_t first_chunk_id = 0);

std::int64_t frame_time_us(const Scene& scene, std::int64_t frame_index);
std::int64_t scene_duration_us(const Scene& scene);

}  // namespace hilo
