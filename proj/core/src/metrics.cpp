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

#include "hilo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "hilo/coordinator.hpp"
#include "hilo/dataset.hpp"
#include "hilo/runtime/sim.hpp"

namespace hilo {

using nlohmann::json;

FrameMatch match_frame(std::span<const LabelResult> labels, std::span<const GroundTruthObject> objects,
                       const MatchConfig& cfg) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a].score > labels[b].score; });
  std::vector<bool> taken(objects.size(), false);
  FrameMatch m;
  for (std::size_t li : order) {
    const LabelResult& l = labels[li];
    double best = -1.0;
    std::size_t best_idx = objects.size();
    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      if (taken[oi]) continue;
      if (cfg.per_class && objects[oi].class_id != l.class_id) continue;
      const double v = iou(l.bbox, objects[oi].bbox);
      if (v >= cfg.iou_threshold && v > best) {
        best = v;
        best_idx = oi;
      }
    }
    if (best_idx < objects.size()) {
      taken[best_idx] = true;
      m.pairs.emplace_back(li, best_idx);
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<int>(objects.size()) - m.tp;
  return m;
}

Accuracy accuracy_from_counts(int tp, int fp, int fn) {
  Accuracy a{tp, fp, fn, 0.0, 0.0, 0.0};
  a.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  a.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  a.f1 = a.precision + a.recall > 0 ? 2 * a.precision * a.recall / (a.precision + a.recall) : 0.0;
  return a;
}

Accuracy f1_score(std::span<const LabelResult> labels, std::span<const Frame> frames, const MatchConfig& cfg) {
  std::map<std::int64_t, std::vector<LabelResult>> by_frame;
  for (const LabelResult& l : labels) by_frame[l.frame_index].push_back(l);
  int tp = 0, fp = 0, fn = 0;
  for (const Frame& f : frames) {
    auto it = by_frame.find(f.frame_index);
    const std::vector<LabelResult> none;
    const FrameMatch m = match_frame(it == by_frame.end() ? none : it->second, f.objects, cfg);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    if (it != by_frame.end()) by_frame.erase(it);
  }
  // Labels on frames outside the evaluated set are all false positives.
  for (const auto& [frame, ls] : by_frame) fp += static_cast<int>(ls.size());
  return accuracy_from_counts(tp, fp, fn);
}

Bandwidth bandwidth(std::span<const ProtocolTrace> traces, double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("bandwidth needs a positive duration");
  Bandwidth b;
  for (const ProtocolTrace& t : traces) {
    b.uplink_bytes += t.uplink_bytes;
    b.reference_bytes += t.reference_bytes;
    b.downlink_bytes += t.downlink_bytes;
  }
  b.bytes_per_s = static_cast<double>(b.uplink_bytes) / duration_s;
  b.normalized = b.reference_bytes > 0 ? static_cast<double>(b.uplink_bytes) / static_cast<double>(b.reference_bytes) : 0.0;
  return b;
}

std::int64_t cloud_frames(std::span<const ProtocolTrace> traces) {
  std::int64_t n = 0;
  for (const ProtocolTrace& t : traces) n += t.cloud_frames + t.wasted_cloud_frames;
  return n;
}

double cloud_cost(std::span<const ProtocolTrace> traces, double price_per_frame) {
  if (price_per_frame < 0) throw std::invalid_argument("price per frame must be >= 0");
  return price_per_frame * static_cast<double>(cloud_frames(traces));
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double rank = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Percentiles summarize(std::vector<double> values) {
  Percentiles p;
  p.count = static_cast<int>(values.size());
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  p.p50 = percentile(values, 0.5);
  p.p90 = percentile(values, 0.9);
  p.p99 = percentile(values, 0.99);
  p.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return p;
}

namespace {

using ObjectKey = std::tuple<int, int, int, std::int64_t>;  // stream, cycle, scene, object

struct SceneIndex {
  std::map<std::int64_t, const Frame*> frames;
  std::map<std::int64_t, std::int64_t> first_frame;  // object -> frame index
};

std::vector<SceneIndex> index_scenes(std::span<const Scene> scenes) {
  std::vector<SceneIndex> out(scenes.size());
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (const Frame& f : scenes[s].frames) {
      out[s].frames[f.frame_index] = &f;
      for (const GroundTruthObject& o : f.objects) out[s].first_frame.emplace(o.object_id, f.frame_index);
    }
  }
  return out;
}

const Scene& scene_of(std::span<const Scene> scenes, const ProtocolTrace& t) {
  if (t.scene_index < 0 || static_cast<std::size_t>(t.scene_index) >= scenes.size()) {
    throw std::out_of_range("trace refers to unknown scene " + std::to_string(t.scene_index));
  }
  return scenes[static_cast<std::size_t>(t.scene_index)];
}

/// Absolute time of scene frame 0 on the trace's stream.
std::int64_t scene_origin_us(const Scene& scene, const ProtocolTrace& t) {
  if (t.frames.empty()) return t.ready_us;
  return t.ready_us - frame_time_us(scene, t.frames.back());
}

struct Evaluated {
  Accuracy accuracy;
  // (object, label time) for every true positive
  std::vector<std::tuple<ObjectKey, std::int64_t>> hits;
  std::vector<ObjectKey> seen;
};

Evaluated evaluate_trace(const ProtocolTrace& t, const SceneIndex& idx, const MatchConfig& cfg) {
  std::map<std::int64_t, std::vector<LabelResult>> by_frame;
  for (const LabelResult& l : t.labels) by_frame[l.frame_index].push_back(l);
  Evaluated e;
  int tp = 0, fp = 0, fn = 0;
  for (std::int64_t fi : t.frames) {
    auto fit = idx.frames.find(fi);
    if (fit == idx.frames.end()) continue;
    const Frame& f = *fit->second;
    const std::vector<LabelResult>& ls = by_frame[fi];
    const FrameMatch m = match_frame(ls, f.objects, cfg);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    for (const GroundTruthObject& o : f.objects) e.seen.emplace_back(t.stream_id, t.cycle, t.scene_index, o.object_id);
    for (const auto& [li, oi] : m.pairs) {
      e.hits.emplace_back(ObjectKey{t.stream_id, t.cycle, t.scene_index, f.objects[oi].object_id},
                          ls[li].timestamp_us);
    }
    by_frame.erase(fi);
  }
  for (const auto& [frame, ls] : by_frame) fp += static_cast<int>(ls.size());
  e.accuracy = accuracy_from_counts(tp, fp, fn);
  return e;
}

}  // namespace

Freshness freshness_latency(std::span<const ProtocolTrace> traces, std::span<const Scene> scenes,
                            const MatchConfig& cfg) {
  const auto idx = index_scenes(scenes);
  std::map<ObjectKey, std::int64_t> first_label;
  std::map<ObjectKey, std::int64_t> appeared;
  std::map<std::tuple<int, int, int>, std::int64_t> stream_start;
  for (const ProtocolTrace& t : traces) {
    const Scene& scene = scene_of(scenes, t);
    if (t.frames.empty()) continue;
    const std::int64_t origin = scene_origin_us(scene, t);
    const std::int64_t first_kf = origin + frame_time_us(scene, t.frames.front());
    auto key = std::make_tuple(t.stream_id, t.cycle, t.scene_index);
    auto [it, fresh] = stream_start.emplace(key, first_kf);
    if (!fresh) it->second = std::min(it->second, first_kf);
  }
  for (const ProtocolTrace& t : traces) {
    const Scene& scene = scene_of(scenes, t);
    const SceneIndex& si = idx[static_cast<std::size_t>(t.scene_index)];
    const Evaluated e = evaluate_trace(t, si, cfg);
    const std::int64_t origin = scene_origin_us(scene, t);
    for (const ObjectKey& k : e.seen) {
      if (appeared.count(k)) continue;
      const std::int64_t t0 = origin + frame_time_us(scene, si.first_frame.at(std::get<3>(k)));
      const std::int64_t start = stream_start.at(std::make_tuple(t.stream_id, t.cycle, t.scene_index));
      appeared[k] = std::max(t0, start);
    }
    for (const auto& [k, at] : e.hits) {
      auto [it, fresh] = first_label.emplace(k, at);
      if (!fresh) it->second = std::min(it->second, at);
    }
  }
  Freshness f;
  for (const auto& [k, t0] : appeared) {
    auto it = first_label.find(k);
    if (it == first_label.end()) {
      ++f.unlabeled_objects;
      continue;
    }
    f.per_object_s.push_back(us_to_seconds(it->second - t0));
  }
  f.labeled_objects = static_cast<int>(f.per_object_s.size());
  f.latency_s = summarize(f.per_object_s);
  return f;
}

MetricsReport compute_metrics(std::span<const ProtocolTrace> traces, std::span<const Scene> scenes,
                              const MetricsOptions& opts) {
  MetricsReport r;
  r.strategy = opts.strategy;
  r.chunks = static_cast<int>(traces.size());
  r.price_per_frame = opts.price_per_frame;

  double duration = opts.duration_s;
  if (duration <= 0.0 && !traces.empty()) {
    std::int64_t lo = traces.front().ready_us, hi = traces.front().ready_us;
    for (const ProtocolTrace& t : traces) {
      const Scene& scene = scene_of(scenes, t);
      const std::int64_t start = t.frames.empty() ? t.ready_us : scene_origin_us(scene, t) + frame_time_us(scene, t.frames.front());
      lo = std::min(lo, start);
      hi = std::max(hi, t.ready_us);
    }
    duration = us_to_seconds(hi - lo);
  }
  r.duration_s = duration;
  if (duration > 0.0) {
    r.bw = bandwidth(traces, duration);
  }

  const auto idx = index_scenes(scenes);
  int tp = 0, fp = 0, fn = 0;
  std::vector<double> response;
  for (const ProtocolTrace& t : traces) {
    scene_of(scenes, t);  // validates the scene index
    const Evaluated e = evaluate_trace(t, idx[static_cast<std::size_t>(t.scene_index)], opts.match);
    tp += e.accuracy.tp;
    fp += e.accuracy.fp;
    fn += e.accuracy.fn;
    r.cloud_invocations += t.cloud_invocations;
    response.push_back(us_to_seconds(t.done_us - t.ready_us));

    ChunkPoint p;
    p.chunk_id = t.chunk_id;
    p.stream_id = t.stream_id;
    p.path = t.path;
    p.ready_s = us_to_seconds(t.ready_us);
    p.done_s = us_to_seconds(t.done_us);
    p.normalized_bandwidth =
        t.reference_bytes > 0 ? static_cast<double>(t.uplink_bytes) / static_cast<double>(t.reference_bytes) : 0.0;
    p.accuracy = e.accuracy;
    p.cost = opts.price_per_frame * static_cast<double>(t.cloud_frames + t.wasted_cloud_frames);
    p.latency_s = us_to_seconds(t.done_us - t.ready_us);
    for (const LabelResult& l : t.labels) p.labels_backup += l.source == LabelSource::backup ? 1 : 0;
    r.series.push_back(std::move(p));
  }
  r.accuracy = accuracy_from_counts(tp, fp, fn);
  r.cloud_frames = cloud_frames(traces);
  r.cost = cloud_cost(traces, opts.price_per_frame);
  r.freshness = freshness_latency(traces, scenes, opts.match);
  r.response_s = summarize(response);

  return r;
}

json to_json(const Accuracy& a) {
  return json{{"tp", a.tp}, {"fp", a.fp}, {"fn", a.fn}, {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

json to_json(const Percentiles& p) {
  return json{{"count", p.count}, {"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}, {"mean", p.mean}};
}

json to_json(const MetricsReport& r) {
  json series = json::array();
  for (const ChunkPoint& p : r.series) {
    series.push_back({{"chunk_id", p.chunk_id},
                      {"stream_id", p.stream_id},
                      {"path", p.path},
                      {"ready_s", p.ready_s},
                      {"done_s", p.done_s},
                      {"normalized_bandwidth", p.normalized_bandwidth},
                      {"f1", p.accuracy.f1},
                      {"cost", p.cost},
                      {"latency_s", p.latency_s},
                      {"backup_labels", p.labels_backup}});
  }
  json freshness = to_json(r.freshness.latency_s);
  freshness["labeled_objects"] = r.freshness.labeled_objects;
  freshness["unlabeled_objects"] = r.freshness.unlabeled_objects;
  return json{{"strategy", r.strategy},
              {"chunks", r.chunks},
              {"duration_s", r.duration_s},
              {"bandwidth",
               {{"bytes_per_s", r.bw.bytes_per_s},
                {"normalized", r.bw.normalized},
                {"uplink_bytes", r.bw.uplink_bytes},
                {"reference_bytes", r.bw.reference_bytes},
                {"downlink_bytes", r.bw.downlink_bytes}}},
              {"accuracy", to_json(r.accuracy)},
              {"cloud_cost",
               {{"price_per_frame", r.price_per_frame},
                {"frames", r.cloud_frames},
                {"invocations", r.cloud_invocations},
                {"cost", r.cost}}},
              {"latency", {{"freshness_s", freshness}, {"response_s", to_json(r.response_s)}}},
              {"series", series},
              {"extra", r.extra}};
}

std::string comparison_table(const std::vector<json>& reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %10s %8s %10s %8s %10s %10s\n", "strategy", "bandwidth", "f1", "cost",
                "chunks", "p50_fresh", "p50_resp");
  out << line;
  for (const json& r : reports) {
    std::snprintf(line, sizeof line, "%-14s %10.4f %8.4f %10.1f %8d %10.3f %10.3f\n",
                  r.at("strategy").get<std::string>().c_str(), r.at("bandwidth").at("normalized").get<double>(),
                  r.at("accuracy").at("f1").get<double>(), r.at("cloud_cost").at("cost").get<double>(),
                  r.at("chunks").get<int>(), r.at("latency").at("freshness_s").at("p50").get<double>(),
                  r.at("latency").at("response_s").at("p50").get<double>());
    out << line;
  }
  return out.str();
}

}  // namespace hilo
