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

#include "hilo/datamodel.hpp"

#include <algorithm>

namespace hilo {

void validate(const QualityLevel& q) {
  if (!(q.resolution_scale > 0.0 && q.resolution_scale <= 1.0)) {
    throw InvariantError("resolution_scale out of range (0,1]");
  }
  if (q.qp < 0 || q.qp > 51) {
    throw InvariantError("qp out of range [0,51]");
  }
}

BBox clamp_to_frame(const BBox& b, int width, int height) {
  const double x0 = std::clamp(b.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(b.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(b.right(), 0.0, static_cast<double>(width));
  const double y1 = std::clamp(b.bottom(), 0.0, static_cast<double>(height));
  return BBox{x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

std::string to_string(LabelSource s) {
  switch (s) {
    case LabelSource::cloud: return "cloud";
    case LabelSource::fog: return "fog";
    case LabelSource::backup: return "backup";
    case LabelSource::human: return "human";
  }
  return "cloud";
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "cloud") return LabelSource::cloud;
  if (s == "fog") return LabelSource::fog;
  if (s == "backup") return LabelSource::backup;
  if (s == "human") return LabelSource::human;
  throw InvariantError("unknown label source '" + s + "'");
}

std::string to_string(DeviceClass d) {
  switch (d) {
    case DeviceClass::client: return "client";
    case DeviceClass::fog: return "fog";
    case DeviceClass::cloud: return "cloud";
  }
  return "client";
}

DeviceClass device_class_from_string(const std::string& s) {
  if (s == "client") return DeviceClass::client;
  if (s == "fog") return DeviceClass::fog;
  if (s == "cloud") return DeviceClass::cloud;
  throw InvariantError("unknown device class '" + s + "'");
}

}  // namespace hilo
