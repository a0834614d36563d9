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
#include <span>
#include <stdexcept>
#include <utility>

#include "hilo/datamodel.hpp"

namespace hilo {

/// Parametric stand-in for a video encoder's output size: bytes scale with
/// pixel count and halve every `qp_halving` QP steps above `qp_ref`.
struct SizeModel {
  double base_bytes_per_pixel = 0.1;
  int qp_ref = 26;
  int qp_halving = 6;
};

void validate(const SizeModel& m);

/// Simulated seconds per megapixel of input for decode + re-encode.
struct EncodeTimeModel {
  double client_s_per_mp = 0.04;
  double fog_s_per_mp = 0.004;
  double cloud_s_per_mp = 0.002;

  double cost(DeviceClass device) const;
};

void validate(const EncodeTimeModel& m);

/// Bytes per source pixel at quality `q`, before the resolution scaling.
double bytes_per_pixel(const QualityLevel& q, const SizeModel& m);

std::int64_t chunk_size_bytes(std::span<const Frame> frames, const QualityLevel& q, const SizeModel& m);

/// Encoded size of a set of crops given by their area in source pixels.
std::int64_t region_size_bytes(double source_pixel_area, const QualityLevel& q, const SizeModel& m);

/// Time to decode `frames` and encode them again, charged on `device`.
std::int64_t encode_time_us(std::span<const Frame> frames, double input_scale, DeviceClass device,
                            const EncodeTimeModel& m);

class UpscaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Re-encodes `chunk` at `target`. Annotations are carried through untouched.
/// Throws UpscaleError if the target resolution exceeds the current one.
std::pair<VideoChunk, std::int64_t> reencode(const VideoChunk& chunk, const QualityLevel& target,
                                             DeviceClass device, const SizeModel& size_model,
                                             const EncodeTimeModel& time_model);

}  // namespace hilo
