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

#include "hilo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hilo/random.hpp"

namespace hilo {

using nlohmann::json;

void validate(const DatasetSpec& s) {
  if (s.classes < 2) throw InvariantError("classes must be >= 2 (one-vs-all needs two classes)");
  if (s.scenes < 1) throw InvariantError("scenes must be >= 1");
  if (s.frames < 0) throw InvariantError("frames must be >= 0");
  if (s.width <= 0 || s.height <= 0) throw InvariantError("width and height must be > 0");
  if (!(s.fps > 0.0)) throw InvariantError("fps must be > 0");
  if (s.objects_per_frame < 0.0) throw InvariantError("objects_per_frame must be >= 0");
  if (s.min_lifetime < 1 || s.max_lifetime < s.min_lifetime) {
    throw InvariantError("lifetime range must satisfy 1 <= min_lifetime <= max_lifetime");
  }
  if (!(s.min_size > 0.0) || s.max_size < s.min_size) {
    throw InvariantError("size range must satisfy 0 < min_size <= max_size");
  }
  if (s.max_speed < 0.0) throw InvariantError("max_speed must be >= 0");
  if (s.min_difficulty < 0.0 || s.max_difficulty > 1.0 || s.max_difficulty < s.min_difficulty) {
    throw InvariantError("difficulty range must lie in [0,1]");
  }
  if (s.drift_rate < 0.0) throw InvariantError("drift_rate must be >= 0");
}

namespace {

struct Track {
  std::int64_t id = 0;
  int class_id = 0;
  double x = 0, y = 0, w = 0, h = 0;
  double vx = 0, vy = 0;
  double difficulty = 0;
  int remaining = 0;
};

// Objects live in slots. Each slot alternates between an occupied period
// (one object's lifetime) and an empty gap sized so that the mean number of
// occupied slots equals objects_per_frame.
struct Slot {
  bool occupied = false;
  int wait = 0;
  Track track;
};

Track spawn(const DatasetSpec& s, Rng& rng, std::int64_t id) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Track t;
  t.id = id;
  t.class_id = std::uniform_int_distribution<int>(0, s.classes - 1)(rng);
  t.w = s.min_size + (s.max_size - s.min_size) * unit(rng);
  t.h = std::clamp(t.w * (0.6 + unit(rng)), s.min_size, std::min<double>(s.max_size * 1.6, s.height));
  t.w = std::min<double>(t.w, s.width);
  t.x = (s.width - t.w) * unit(rng);
  t.y = (s.height - t.h) * unit(rng);
  t.vx = s.max_speed * (2.0 * unit(rng) - 1.0);
  t.vy = s.max_speed * (2.0 * unit(rng) - 1.0);
  t.difficulty = s.min_difficulty + (s.max_difficulty - s.min_difficulty) * unit(rng);
  t.remaining = std::uniform_int_distribution<int>(s.min_lifetime, s.max_lifetime)(rng);
  return t;
}

void advance(Track& t, const DatasetSpec& s) {
  t.x += t.vx;
  t.y += t.vy;
  if (t.x < 0.0) {
    t.x = -t.x;
    t.vx = -t.vx;
  }
  if (t.y < 0.0) {
    t.y = -t.y;
    t.vy = -t.vy;
  }
  if (t.x + t.w > s.width) {
    t.x = std::max(0.0, 2.0 * (s.width - t.w) - t.x);
    t.vx = -t.vx;
  }
  if (t.y + t.h > s.height) {
    t.y = std::max(0.0, 2.0 * (s.height - t.h) - t.y);
    t.vy = -t.vy;
  }
}

Scene generate_scene(const DatasetSpec& s, Rng& rng) {
  Scene scene;
  scene.width = s.width;
  scene.height = s.height;
  scene.classes = s.classes;
  scene.fps = s.fps;
  scene.frames.reserve(static_cast<std::size_t>(s.frames));

  const int n_slots = static_cast<int>(std::ceil(s.objects_per_frame));
  const double occupancy = n_slots > 0 ? s.objects_per_frame / n_slots : 0.0;
  const double mean_life = 0.5 * (s.min_lifetime + s.max_lifetime);
  const double mean_gap = occupancy > 0.0 ? mean_life * (1.0 / occupancy - 1.0) : 0.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_gap = [&] {
    return mean_gap > 0.0 ? static_cast<int>(std::lround(2.0 * mean_gap * unit(rng))) : 0;
  };

  std::int64_t next_id = 0;
  std::vector<Slot> slots(static_cast<std::size_t>(n_slots));
  for (Slot& slot : slots) {
    if (unit(rng) < occupancy) {
      slot.occupied = true;
      slot.track = spawn(s, rng, next_id++);
      // Start mid-life so the first frames look like steady state.
      slot.track.remaining = 1 + std::uniform_int_distribution<int>(0, slot.track.remaining - 1)(rng);
    } else {
      slot.wait = draw_gap();
    }
  }

  for (int f = 0; f < s.frames; ++f) {
    Frame frame;
    frame.frame_index = f;
    frame.width = s.width;
    frame.height = s.height;
    for (Slot& slot : slots) {
      if (!slot.occupied) {
        if (slot.wait > 0) {
          --slot.wait;
          continue;
        }
        slot.occupied = true;
        slot.track = spawn(s, rng, next_id++);
      }
      const Track& t = slot.track;
      GroundTruthObject obj;
      obj.object_id = t.id;
      obj.class_id = t.class_id;
      obj.bbox = clamp_to_frame(BBox{t.x, t.y, t.w, t.h}, s.width, s.height);
      obj.difficulty = t.difficulty;
      obj.drift_phase = s.drift_rate * f;
      frame.objects.push_back(obj);

      advance(slot.track, s);
      if (--slot.track.remaining <= 0) {
        slot.occupied = false;
        slot.wait = draw_gap();
      }
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

double number_field(const json& j, const char* key, int line) {
  auto it = j.find(key);
  if (it == j.end()) throw DatasetError(std::string("missing field '") + key + "'", line);
  if (!it->is_number()) throw DatasetError(std::string("field '") + key + "' must be a number", line);
  return it->get<double>();
}

std::int64_t integer_field(const json& j, const char* key, int line) {
  const double v = number_field(j, key, line);
  if (v != std::floor(v)) throw DatasetError(std::string("field '") + key + "' must be an integer", line);
  return static_cast<std::int64_t>(v);
}

Scene parse_header(const json& j, int line) {
  if (integer_field(j, "version", line) != 1) throw DatasetError("unsupported version", line);
  Scene scene;
  scene.width = static_cast<int>(integer_field(j, "width", line));
  scene.height = static_cast<int>(integer_field(j, "height", line));
  scene.classes = static_cast<int>(integer_field(j, "classes", line));
  scene.fps = number_field(j, "fps", line);
  if (scene.width <= 0 || scene.height <= 0) throw DatasetError("field 'width'/'height' must be > 0", line);
  if (scene.classes < 2) throw DatasetError("field 'classes' must be >= 2", line);
  if (!(scene.fps > 0.0)) throw DatasetError("field 'fps' must be > 0", line);
  if (j.contains("qp")) scene.source_quality.qp = static_cast<int>(integer_field(j, "qp", line));
  if (j.contains("resolution_scale")) {
    scene.source_quality.resolution_scale = number_field(j, "resolution_scale", line);
  }
  try {
    validate(scene.source_quality);
  } catch (const InvariantError& e) {
    throw DatasetError(e.what(), line);
  }
  return scene;
}

Frame parse_frame(const json& j, const Scene& scene, int line) {
  Frame frame;
  frame.frame_index = integer_field(j, "frame", line);
  frame.width = scene.width;
  frame.height = scene.height;
  auto objs = j.find("objects");
  if (objs == j.end() || !objs->is_array()) throw DatasetError("field 'objects' must be an array", line);
  for (const json& o : *objs) {
    GroundTruthObject obj;
    obj.object_id = integer_field(o, "id", line);
    obj.class_id = static_cast<int>(integer_field(o, "class", line));
    if (obj.class_id < 0 || obj.class_id >= scene.classes) {
      throw DatasetError("field 'class' out of range [0," + std::to_string(scene.classes) + ")", line);
    }
    auto bb = o.find("bbox");
    if (bb == o.end() || !bb->is_array() || bb->size() != 4) {
      throw DatasetError("field 'bbox' must be [x,y,w,h]", line);
    }
    for (const json& v : *bb) {
      if (!v.is_number()) throw DatasetError("field 'bbox' must contain numbers", line);
    }
    obj.bbox = BBox{(*bb)[0].get<double>(), (*bb)[1].get<double>(), (*bb)[2].get<double>(),
                    (*bb)[3].get<double>()};
    if (!(obj.bbox.w > 0.0 && obj.bbox.h > 0.0)) throw DatasetError("field 'bbox' needs w > 0 and h > 0", line);
    obj.bbox = clamp_to_frame(obj.bbox, scene.width, scene.height);
    if (!(obj.bbox.w > 0.0 && obj.bbox.h > 0.0)) throw DatasetError("field 'bbox' lies outside the frame", line);
    obj.difficulty = number_field(o, "difficulty", line);
    if (obj.difficulty < 0.0 || obj.difficulty > 1.0) throw DatasetError("field 'difficulty' out of range [0,1]", line);
    obj.drift_phase = number_field(o, "drift_phase", line);
    frame.objects.push_back(obj);
  }
  return frame;
}

}  // namespace

std::vector<Scene> generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::vector<Scene> scenes;
  for (int i = 0; i < spec.scenes; ++i) {
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(i)}));
    scenes.push_back(generate_scene(spec, rng));
  }
  return scenes;
}

std::vector<Scene> read_dataset(std::istream& in) {
  std::vector<Scene> scenes;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DatasetError(std::string("parse error: ") + e.what(), line);
    }
    if (!j.is_object()) throw DatasetError("each line must be a JSON object", line);
    if (j.contains("version")) {
      scenes.push_back(parse_header(j, line));
      continue;
    }
    if (scenes.empty()) throw DatasetError("frame record before header", line);
    Scene& scene = scenes.back();
    Frame frame = parse_frame(j, scene, line);
    if (!scene.frames.empty() && frame.frame_index <= scene.frames.back().frame_index) {
      throw DatasetError("field 'frame' must increase within a scene", line);
    }
    scene.frames.push_back(std::move(frame));
  }
  return scenes;
}

std::vector<Scene> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path, 0);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<Scene>& scenes) {
  for (const Scene& scene : scenes) {
    json header = {{"version", 1},
                   {"width", scene.width},
                   {"height", scene.height},
                   {"classes", scene.classes},
                   {"fps", scene.fps}};
    if (scene.source_quality != QualityLevel{}) {
      header["qp"] = scene.source_quality.qp;
      header["resolution_scale"] = scene.source_quality.resolution_scale;
    }
    out << header.dump() << '\n';
    for (const Frame& f : scene.frames) {
      json objs = json::array();
      for (const GroundTruthObject& o : f.objects) {
        objs.push_back({{"id", o.object_id},
                        {"class", o.class_id},
                        {"bbox", {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h}},
                        {"difficulty", o.difficulty},
                        {"drift_phase", o.drift_phase}});
      }
      out << json{{"frame", f.frame_index}, {"objects", std::move(objs)}}.dump() << '\n';
    }
  }
}

void save_dataset(const std::string& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path, 0);
  write_dataset(out, scenes);
}

std::int64_t frame_time_us(const Scene& scene, std::int64_t frame_index) {
  return std::llround(static_cast<double>(frame_index) * 1e6 / scene.fps);
}

std::int64_t scene_duration_us(const Scene& scene) {
  if (scene.frames.empty()) return 0;
  return frame_time_us(scene, scene.frames.back().frame_index + 1);
}

std::vector<SceneChunk> make_chunks(const Scene& scene, int scene_index, const ChunkingConfig& cfg,
                                    const SizeModel& size_model, std::int64_t first_chunk_id) {
  if (cfg.keyframe_interval < 1 || cfg.keyframes_per_chunk < 1) {
    throw InvariantError("keyframe_interval and keyframes_per_chunk must be >= 1");
  }
  std::vector<SceneChunk> chunks;
  SceneChunk current;
  auto flush = [&] {
    if (current.chunk.keyframes.empty()) return;
    current.scene_index = scene_index;
    current.chunk.chunk_id = first_chunk_id + static_cast<std::int64_t>(chunks.size());
    current.chunk.quality = scene.source_quality;
    current.chunk.encoded_bytes = chunk_size_bytes(current.chunk.keyframes, scene.source_quality, size_model);
    current.ready_us = current.keyframe_time_us.back();
    chunks.push_back(std::move(current));
    current = SceneChunk{};
  };
  for (std::size_t i = 0; i < scene.frames.size(); i += static_cast<std::size_t>(cfg.keyframe_interval)) {
    const Frame& f = scene.frames[i];
    current.chunk.keyframes.push_back(f);
    current.keyframe_time_us.push_back(frame_time_us(scene, f.frame_index));
    if (static_cast<int>(current.chunk.keyframes.size()) == cfg.keyframes_per_chunk) flush();
  }
  flush();
  return chunks;
}

}  // namespace hilo
