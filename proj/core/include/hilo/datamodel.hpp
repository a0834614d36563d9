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

/// Encoding quality of a chunk: resolution scale (RS) in (0,1] and the
/// codec quantization parameter (QP) in [0,51].
struct QualityLevel {
  double resolution_scale = 1.0;
  int qp = 26;

  bool operator==(const QualityLevel&) const = default;
};

/// Throws InvariantError when the level is outside its domain.
void validate(const QualityLevel& q);

/// Axis-aligned box in pixel coordinates, (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool operator==(const BBox&) const = default;
};

/// Clamps `b` into a width x height frame. May return a box with zero area
/// when `b` lies completely outside.
BBox clamp_to_frame(const BBox& b, int width, int height);
double intersection_area(const BBox& a, const BBox& b);

struct GroundTruthObject {
  std::int64_t object_id = 0;
  int class_id = 0;
  BBox bbox;
  double difficulty = 0.0;
  double drift_phase = 0.0;

  bool operator==(const GroundTruthObject&) const = default;
};

struct Frame {
  std::int64_t frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthObject> objects;

  bool operator==(const Frame&) const = default;
};

/// One continuous recording: a header plus frames in ascending order.
struct Scene {
  int width = 1280;
  int height = 720;
  int classes = 10;
  double fps = 30.0;
  /// Encoding of the camera output the scene was recorded at.
  QualityLevel source_quality;
  std::vector<Frame> frames;

  bool operator==(const Scene&) const = default;
};

struct VideoChunk {
  std::int64_t chunk_id = 0;
  std::vector<Frame> keyframes;
  QualityLevel quality;
  std::int64_t encoded_bytes = 0;
};

struct Detection {
  BBox bbox;
  std::optional<int> class_id;
  double loc_score = 0.0;
  double cls_score = 0.0;

  bool operator==(const Detection&) const = default;
};

enum class LabelSource { cloud, fog, backup, human };

std::string to_string(LabelSource s);
LabelSource label_source_from_string(const std::string& s);

/// A final answer for one region of one keyframe.
struct LabelResult {
  std::int64_t frame_index = 0;
  BBox bbox;
  int class_id = 0;
  double score = 0.0;
  LabelSource source = LabelSource::cloud;
  std::int64_t timestamp_us = 0;

  bool operator==(const LabelResult&) const = default;
};

enum class DeviceClass { client, fog, cloud };

std::string to_string(DeviceClass d);
DeviceClass device_class_from_string(const std::string& s);

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hilo
