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

#include <cmath>
#include <vector>

#include "hilo/config.hpp"
#include "hilo/datamodel.hpp"
#include "hilo/dataset.hpp"

namespace testing {

inline hilo::GroundTruthObject object(std::int64_t id, int cls, hilo::BBox box, double difficulty = 0.0) {
  hilo::GroundTruthObject o;
  o.object_id = id;
  o.class_id = cls;
  o.bbox = box;
  o.difficulty = difficulty;
  return o;
}

/// A scene whose objects never move.
inline hilo::Scene static_scene(int frames, std::vector<hilo::GroundTruthObject> objects, int classes = 4) {
  hilo::Scene s;
  s.classes = classes;
  for (int f = 0; f < frames; ++f) {
    hilo::Frame fr;
    fr.frame_index = f;
    fr.width = s.width;
    fr.height = s.height;
    fr.objects = objects;
    s.frames.push_back(fr);
  }
  return s;
}

/// Objects jump by `step` pixels every frame, so every keyframe looks new.
inline hilo::Scene moving_scene(int frames, int objects, double step, int classes = 4) {
  hilo::Scene s;
  s.classes = classes;
  for (int f = 0; f < frames; ++f) {
    hilo::Frame fr;
    fr.frame_index = f;
    fr.width = s.width;
    fr.height = s.height;
    for (int i = 0; i < objects; ++i) {
      const double x = std::fmod(50.0 + 200.0 * i + step * f, 1100.0);
      fr.objects.push_back(object(i, i % classes, {x, 100.0 + 120.0 * i, 80.0, 80.0}));
    }
    s.frames.push_back(fr);
  }
  return s;
}

inline std::vector<hilo::Frame> frames_of(int n, int width = 1280, int height = 720) {
  std::vector<hilo::Frame> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].frame_index = i;
    out[static_cast<std::size_t>(i)].width = width;
    out[static_cast<std::size_t>(i)].height = height;
  }
  return out;
}

}  // namespace testing
