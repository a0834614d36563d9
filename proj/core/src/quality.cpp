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

#include "hilo/quality.hpp"

#include <cmath>

namespace hilo {

void validate(const SizeModel& m) {
  if (!(m.base_bytes_per_pixel > 0.0)) throw InvariantError("size_model.base_bytes_per_pixel must be > 0");
  if (m.qp_halving <= 0) throw InvariantError("size_model.qp_halving must be > 0");
}

double EncodeTimeModel::cost(DeviceClass device) const {
  switch (device) {
    case DeviceClass::client: return client_s_per_mp;
    case DeviceClass::fog: return fog_s_per_mp;
    case DeviceClass::cloud: return cloud_s_per_mp;
  }
  return client_s_per_mp;
}

void validate(const EncodeTimeModel& m) {
  if (m.cloud_s_per_mp < 0.0) throw InvariantError("encode_time.cloud_s_per_mp must be >= 0");
  if (!(m.client_s_per_mp > m.fog_s_per_mp && m.fog_s_per_mp >= m.cloud_s_per_mp)) {
    throw InvariantError("encode_time must satisfy client > fog >= cloud");
  }
}

double bytes_per_pixel(const QualityLevel& q, const SizeModel& m) {
  return m.base_bytes_per_pixel *
         std::exp2(-static_cast<double>(q.qp - m.qp_ref) / static_cast<double>(m.qp_halving));
}

std::int64_t chunk_size_bytes(std::span<const Frame> frames, const QualityLevel& q, const SizeModel& m) {
  double pixels = 0.0;
  for (const Frame& f : frames) {
    pixels += (q.resolution_scale * f.width) * (q.resolution_scale * f.height);
  }
  return std::llround(pixels * bytes_per_pixel(q, m));
}

std::int64_t region_size_bytes(double source_pixel_area, const QualityLevel& q, const SizeModel& m) {
  const double r = q.resolution_scale;
  return std::llround(source_pixel_area * r * r * bytes_per_pixel(q, m));
}

std::int64_t encode_time_us(std::span<const Frame> frames, double input_scale, DeviceClass device,
                            const EncodeTimeModel& m) {
  double megapixels = 0.0;
  for (const Frame& f : frames) {
    megapixels += (input_scale * f.width) * (input_scale * f.height) / 1e6;
  }
  return std::llround(megapixels * m.cost(device) * 1e6);
}

std::pair<VideoChunk, std::int64_t> reencode(const VideoChunk& chunk, const QualityLevel& target,
                                             DeviceClass device, const SizeModel& size_model,
                                             const EncodeTimeModel& time_model) {
  validate(target);
  if (target.resolution_scale > chunk.quality.resolution_scale) {
    throw UpscaleError("reencode cannot raise resolution_scale from " +
                       std::to_string(chunk.quality.resolution_scale) + " to " +
                       std::to_string(target.resolution_scale));
  }
  VideoChunk out = chunk;
  out.quality = target;
  out.encoded_bytes = chunk_size_bytes(out.keyframes, target, size_model);
  const std::int64_t elapsed =
      encode_time_us(chunk.keyframes, chunk.quality.resolution_scale, device, time_model);
  return {std::move(out), elapsed};
}

}  // namespace hilo
