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

#include "hilo/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "hilo/quality.hpp"
#include "hilo/random.hpp"

namespace hilo {

namespace {

constexpr std::uint64_t kFeatureKey = 0xFEA7ULL;
constexpr std::uint64_t kSampleKey = 0x5A3BULL;
constexpr std::uint64_t kSecondRoundSalt = 0xDD52ULL;

NetworkLink make_link(const std::string& name, const LinkConfig& l, const std::vector<OutageConfig>& outages) {
  std::vector<Outage> o;
  for (const OutageConfig& oc : outages) {
    Outage x;
    x.start_us = seconds_to_us(oc.start_s);
    if (oc.end_s) x.end_us = seconds_to_us(*oc.end_s);
    o.push_back(x);
  }
  return NetworkLink(name, l.bandwidth_mbps * 1e6, ms_to_us(l.propagation_ms), std::move(o));
}

std::vector<std::int64_t> keyframe_indices(const VideoChunk& c) {
  std::vector<std::int64_t> out;
  for (const Frame& f : c.keyframes) out.push_back(f.frame_index);
  return out;
}

double frame_area(const Frame& f) { return static_cast<double>(f.width) * static_cast<double>(f.height); }

LabelResult make_label(std::int64_t frame, const Detection& d, LabelSource src, std::int64_t t) {
  LabelResult l;
  l.frame_index = frame;
  l.bbox = d.bbox;
  l.class_id = d.class_id.value_or(0);
  l.score = d.cls_score;
  l.source = src;
  l.timestamp_us = t;
  return l;
}

/// State of one chunk moving through a strategy. Each stage schedules the
/// next one on the simulator; the object lives as long as a callback holds it.
struct Run : std::enable_shared_from_this<Run> {
  Run(SimEnv& e, const ChunkJob& j, StrategyKind s, DoneFn d, FailFn f)
      : env(e), cfg(e.config()), job(j), done(std::move(d)), fail(std::move(f)) {
    if (job.prior) {
      trace = *job.prior;
      trace.attempts += 1;
      trace.labels.clear();
    } else {
      trace.chunk_id = job.job_id;
      trace.stream_id = job.stream_id;
      trace.scene_index = job.chunk->scene_index;
      trace.cycle = job.cycle;
      trace.ready_us = job.ready_us;
      trace.keyframes = static_cast<int>(src().keyframes.size());
      trace.frames = keyframe_indices(src());
      trace.reference_bytes = src().encoded_bytes;
    }
    trace.strategy = to_string(s);
    trace.path = "cloud";
    trace.state = "labeled";
  }

  const VideoChunk& src() const { return job.chunk->chunk; }
  std::int64_t now() const { return env.sim.now(); }
  void mark(const char* stage) { trace.mark(stage, now()); }
  int n() const { return static_cast<int>(src().keyframes.size()); }

  void after(std::int64_t dt, std::function<void()> next) { env.sim.schedule_in(dt, std::move(next)); }

  void lan(std::int64_t bytes, std::function<void()> next) {
    trace.local_bytes += bytes;
    env.sim.schedule_at(env.lan.send(bytes, now()), std::move(next));
  }

  void wan(NetworkLink& link, std::int64_t bytes, std::function<void()> next) {
    std::int64_t at = 0;
    try {
      at = link.send(bytes, now());
    } catch (const LinkDown&) {
      mark("cloud_unavailable");
      trace.wasted_cloud_frames += trace.cloud_frames;
      trace.cloud_frames = 0;
      trace.cloud_invocations = 0;
      trace.labels.clear();
      if (fail) fail(std::move(trace));
      return;
    }
    if (&link == &env.wan_up) trace.uplink_bytes += bytes;
    if (&link == &env.wan_down) trace.downlink_bytes += bytes;
    env.sim.schedule_at(at, std::move(next));
  }

  void cloud(std::int64_t service_us, std::int64_t frames, std::function<void()> next) {
    trace.cloud_invocations += 1;
    trace.cloud_frames += frames;
    env.cloud_pool.submit(service_us, [next = std::move(next)](std::int64_t, std::int64_t) { next(); });
  }

  void fog(std::int64_t service_us, std::function<void()> next) {
    env.fog_pool.submit(service_us, [next = std::move(next)](std::int64_t, std::int64_t) { next(); });
  }

  std::int64_t cloud_infer_us(std::int64_t frames) const {
    return ms_to_us(cfg.detector.infer_ms_cloud * static_cast<double>(frames));
  }

  std::int64_t region_bytes() const {
    return static_cast<std::int64_t>(cfg.protocol.bytes_per_region);
  }

  void finish() {
    mark("done");
    trace.done_us = now();
    ChunkResult r;
    r.trace = std::move(trace);
    r.review = std::move(review);
    if (done) done(std::move(r));
  }

  SimEnv& env;
  const ExperimentConfig& cfg;
  ChunkJob job;
  DoneFn done;
  FailFn fail;
  ProtocolTrace trace;
  std::vector<ReviewCandidate> review;
};

using RunPtr = std::shared_ptr<Run>;

/// Labels every detection scoring at least `accept`.
void accept_all(Run& r, const std::vector<FrameDetections>& dets, double accept, LabelSource src) {
  for (const FrameDetections& fd : dets) {
    for (const Detection& d : fd.detections) {
      if (d.class_id && d.cls_score >= accept) r.trace.labels.push_back(make_label(fd.frame_index, d, src, 0));
    }
  }
}

void stamp_labels(Run& r, std::size_t from) {
  for (std::size_t i = from; i < r.trace.labels.size(); ++i) r.trace.labels[i].timestamp_us = r.now();
}

// ---------------------------------------------------------------- vpaas

struct Uncertain {
  const Frame* frame;
  Detection det;
};

void vpaas_classify(const RunPtr& r, std::vector<Uncertain> regions) {
  if (regions.empty()) return r->finish();
  const std::uint64_t fseed = r->env.feature_seed(r->job);
  auto outstanding = std::make_shared<std::size_t>(regions.size());
  auto low = std::make_shared<std::vector<ReviewCandidate>>();
  auto sampled = std::make_shared<std::vector<ReviewCandidate>>();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Uncertain u = regions[i];
    Eigen::VectorXd x = r->env.synth.extract(u.det.bbox, *u.frame, fseed);
    r->env.classify(x, [r, u, x, i, outstanding, low, sampled](const Prediction& p, std::int64_t t) {
      const double score = p.scores[p.class_id];
      ReviewCandidate c{r->job.job_id, u.frame, u.det.bbox, x, p.class_id, score};
      if (score >= r->cfg.protocol.fog_accept) {
        LabelResult l;
        l.frame_index = u.frame->frame_index;
        l.bbox = u.det.bbox;
        l.class_id = p.class_id;
        l.score = score;
        l.source = LabelSource::fog;
        l.timestamp_us = t;
        r->trace.labels.push_back(l);
        Rng rng(mix_seed({r->env.feature_seed(r->job), kSampleKey, static_cast<std::uint64_t>(r->job.job_id),
                          static_cast<std::uint64_t>(i)}));
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < r->cfg.hitl.sample_rate) {
          sampled->push_back(std::move(c));
        }
      } else {
        low->push_back(std::move(c));
      }
      if (--*outstanding > 0) return;
      r->mark("classified");
      if (r->cfg.hitl.enabled) {
        std::stable_sort(low->begin(), low->end(),
                         [](const ReviewCandidate& a, const ReviewCandidate& b) { return a.score < b.score; });
        const auto cap = static_cast<std::size_t>(r->cfg.hitl.max_tasks_per_chunk);
        for (auto* pool : {low.get(), sampled.get()}) {
          for (ReviewCandidate& c : *pool) {
            if (r->review.size() >= cap) break;
            r->review.push_back(std::move(c));
          }
        }
      }
      r->finish();
    });
  }
}

void start_vpaas(const RunPtr& r) {
  r->mark("ready");
  r->lan(r->src().encoded_bytes, [r] {
    r->mark("at_fog");
    QualityLevel target = r->cfg.protocol.low_quality;
    target.resolution_scale = std::min(target.resolution_scale, r->src().quality.resolution_scale);
    auto [low, enc_us] = reencode(r->src(), target, DeviceClass::fog, r->cfg.size_model, r->cfg.encode_time);
    auto low_ptr = std::make_shared<VideoChunk>(std::move(low));
    r->fog(enc_us, [r, low_ptr] {
      r->mark("encoded");
      r->wan(r->env.wan_up, low_ptr->encoded_bytes, [r, low_ptr] {
        r->mark("at_cloud");
        r->cloud(r->cloud_infer_us(r->n()), r->n(), [r, low_ptr] {
          r->mark("detected");
          const auto dets = cloud_detect(*low_ptr, r->cfg.detector, r->env.content_seed(r->job));
          auto uncertain = std::make_shared<std::vector<Uncertain>>();
          std::int64_t boxes = 0;
          for (std::size_t i = 0; i < dets.size(); ++i) {
            const Frame& frame = r->src().keyframes[i];
            const FilterResult fr = filter_regions(dets[i].detections, frame_area(frame), r->cfg.protocol.thresholds);
            for (const Detection& d : fr.labels) {
              r->trace.labels.push_back(make_label(frame.frame_index, d, LabelSource::cloud, 0));
            }
            for (const Detection& d : fr.uncertain) uncertain->push_back(Uncertain{&frame, d});
            boxes += static_cast<std::int64_t>(fr.labels.size() + fr.uncertain.size());
          }
          r->trace.uncertain_regions = static_cast<int>(uncertain->size());
          r->wan(r->env.wan_down, boxes * r->region_bytes(), [r, uncertain] {
            r->mark("returned");
            stamp_labels(*r, 0);
            vpaas_classify(r, std::move(*uncertain));
          });
        });
      });
    });
  });
}

// ---------------------------------------------------------------- mpeg

void start_mpeg(const RunPtr& r) {
  r->mark("ready");
  r->lan(r->src().encoded_bytes, [r] {
    r->mark("at_fog");
    r->wan(r->env.wan_up, r->src().encoded_bytes, [r] {
      r->mark("at_cloud");
      r->cloud(r->cloud_infer_us(r->n()), r->n(), [r] {
        r->mark("detected");
        const auto dets = cloud_detect(r->src(), r->cfg.detector, r->env.content_seed(r->job));
        accept_all(*r, dets, r->cfg.protocol.thresholds.cls_accept, LabelSource::cloud);
        r->wan(r->env.wan_down, static_cast<std::int64_t>(r->trace.labels.size()) * r->region_bytes(), [r] {
          r->mark("returned");
          stamp_labels(*r, 0);
          r->finish();
        });
      });
    });
  });
}

// ---------------------------------------------------------------- glimpse

/// Share of objects in `cur` that are new or whose center moved more than
/// `motion_px` since `ref`.
double frame_difference(const Frame& ref, const Frame& cur, double motion_px) {
  if (cur.objects.empty()) return ref.objects.empty() ? 0.0 : 1.0;
  int changed = 0;
  for (const GroundTruthObject& o : cur.objects) {
    auto it = std::find_if(ref.objects.begin(), ref.objects.end(),
                           [&](const GroundTruthObject& p) { return p.object_id == o.object_id; });
    if (it == ref.objects.end()) {
      ++changed;
      continue;
    }
    const double dx = (o.bbox.x + o.bbox.w / 2) - (it->bbox.x + it->bbox.w / 2);
    const double dy = (o.bbox.y + o.bbox.h / 2) - (it->bbox.y + it->bbox.h / 2);
    if (std::hypot(dx, dy) > motion_px) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(cur.objects.size());
}

void start_glimpse(const RunPtr& r) {
  r->mark("ready");
  // The camera keeps the first keyframe and every frame that differs enough
  // from the last one it kept.
  std::vector<std::size_t> sent;
  std::vector<std::size_t> answered_by(r->src().keyframes.size());
  for (std::size_t i = 0; i < r->src().keyframes.size(); ++i) {
    const Frame& f = r->src().keyframes[i];
    if (sent.empty() ||
        frame_difference(r->src().keyframes[sent.back()], f, r->cfg.glimpse.motion_px) > r->cfg.glimpse.diff_threshold) {
      sent.push_back(i);
    }
    answered_by[i] = sent.size() - 1;
  }
  auto frames = std::make_shared<std::vector<Frame>>();
  for (std::size_t i : sent) frames->push_back(r->src().keyframes[i]);
  const std::int64_t bytes = chunk_size_bytes(*frames, r->src().quality, r->cfg.size_model);
  const std::int64_t enc_us =
      encode_time_us(*frames, r->src().quality.resolution_scale, DeviceClass::client, r->cfg.encode_time);
  r->after(enc_us, [r, frames, bytes, answered_by] {
    r->mark("encoded");
    r->lan(bytes, [r, frames, bytes, answered_by] {
      r->mark("at_fog");
      r->wan(r->env.wan_up, bytes, [r, frames, answered_by] {
        r->mark("at_cloud");
        const auto m = static_cast<std::int64_t>(frames->size());
        r->cloud(r->cloud_infer_us(m), m, [r, frames, answered_by] {
          r->mark("detected");
          const auto dets = detect_frames(*frames, r->src().quality, r->cfg.detector, r->env.content_seed(r->job));
          std::vector<std::vector<LabelResult>> per_sent(frames->size());
          std::int64_t boxes = 0;
          for (std::size_t s = 0; s < dets.size(); ++s) {
            for (const Detection& d : dets[s].detections) {
              if (d.class_id && d.cls_score >= r->cfg.protocol.thresholds.cls_accept) {
                per_sent[s].push_back(make_label(dets[s].frame_index, d, LabelSource::cloud, 0));
                ++boxes;
              }
            }
          }
          // Frames that stayed on the camera reuse the answer of the frame
          // that stood in for them.
          for (std::size_t i = 0; i < answered_by.size(); ++i) {
            for (LabelResult l : per_sent[answered_by[i]]) {
              l.frame_index = r->src().keyframes[i].frame_index;
              r->trace.labels.push_back(l);
            }
          }
          r->wan(r->env.wan_down, boxes * r->region_bytes(), [r] {
            r->mark("returned");
            stamp_labels(*r, 0);
            r->finish();
          });
        });
      });
    });
  });
}

// ---------------------------------------------------------------- dds

void dds_second_round(const RunPtr& r, std::vector<Uncertain> regions) {
  double area = 0.0;
  std::map<std::int64_t, std::set<std::size_t>> objects;  // frame index -> objects inside regions
  std::map<std::int64_t, const Frame*> frame_of;
  for (const Uncertain& u : regions) {
    area += u.det.bbox.area();
    frame_of[u.frame->frame_index] = u.frame;
    auto& set = objects[u.frame->frame_index];
    const int idx = dominant_object(u.det.bbox, *u.frame);
    if (idx >= 0) set.insert(static_cast<std::size_t>(idx));
  }
  auto crops = std::make_shared<std::vector<Frame>>();
  for (const auto& [findex, set] : objects) {
    const Frame& f = *frame_of[findex];
    Frame sub{f.frame_index, f.width, f.height, {}};
    for (std::size_t idx : set) sub.objects.push_back(f.objects[idx]);
    crops->push_back(std::move(sub));
  }
  QualityLevel high = r->cfg.protocol.high_quality;
  high.resolution_scale = std::min(high.resolution_scale, r->src().quality.resolution_scale);
  const std::int64_t bytes = region_size_bytes(area, high, r->cfg.size_model);
  const std::int64_t enc_us = std::llround(area / 1e6 * r->cfg.encode_time.client_s_per_mp * 1e6);
  r->after(enc_us, [r, crops, bytes, high] {
    r->mark("regions_encoded");
    r->lan(bytes, [r, crops, bytes, high] {
      r->wan(r->env.wan_up, bytes, [r, crops, high] {
        r->mark("regions_at_cloud");
        const auto m = static_cast<std::int64_t>(crops->size());
        r->cloud(r->cloud_infer_us(m), m, [r, crops, high] {
          r->mark("regions_detected");
          DetectOptions opts;
          opts.salt = kSecondRoundSalt;
          opts.false_proposals = false;
          const auto dets = detect_frames(*crops, high, r->cfg.detector, r->env.content_seed(r->job), opts);
          const std::size_t from = r->trace.labels.size();
          accept_all(*r, dets, r->cfg.dds.accept, LabelSource::cloud);
          const auto boxes = static_cast<std::int64_t>(r->trace.labels.size() - from);
          r->wan(r->env.wan_down, boxes * r->region_bytes(), [r, from] {
            r->mark("regions_returned");
            stamp_labels(*r, from);
            r->finish();
          });
        });
      });
    });
  });
}

void start_dds(const RunPtr& r) {
  r->mark("ready");
  QualityLevel target = r->cfg.protocol.low_quality;
  target.resolution_scale = std::min(target.resolution_scale, r->src().quality.resolution_scale);
  auto [low, enc_us] = reencode(r->src(), target, DeviceClass::client, r->cfg.size_model, r->cfg.encode_time);
  auto low_ptr = std::make_shared<VideoChunk>(std::move(low));
  r->after(enc_us, [r, low_ptr] {
    r->mark("encoded");
    r->lan(low_ptr->encoded_bytes, [r, low_ptr] {
      r->mark("at_fog");
      r->wan(r->env.wan_up, low_ptr->encoded_bytes, [r, low_ptr] {
        r->mark("at_cloud");
        r->cloud(r->cloud_infer_us(r->n()), r->n(), [r, low_ptr] {
          r->mark("detected");
          const auto dets = cloud_detect(*low_ptr, r->cfg.detector, r->env.content_seed(r->job));
          auto uncertain = std::make_shared<std::vector<Uncertain>>();
          std::int64_t boxes = 0;
          for (std::size_t i = 0; i < dets.size(); ++i) {
            const Frame& frame = r->src().keyframes[i];
            const FilterResult fr = filter_regions(dets[i].detections, frame_area(frame), r->cfg.protocol.thresholds);
            for (const Detection& d : fr.labels) {
              r->trace.labels.push_back(make_label(frame.frame_index, d, LabelSource::cloud, 0));
            }
            for (const Detection& d : fr.uncertain) uncertain->push_back(Uncertain{&frame, d});
            boxes += static_cast<std::int64_t>(fr.labels.size() + fr.uncertain.size());
          }
          r->trace.uncertain_regions = static_cast<int>(uncertain->size());
          r->wan(r->env.wan_down, boxes * r->region_bytes(), [r, uncertain] {
            r->mark("returned");
            stamp_labels(*r, 0);
            if (uncertain->empty()) return r->finish();
            dds_second_round(r, std::move(*uncertain));
          });
        });
      });
    });
  });
}

// ---------------------------------------------------------------- cloudseg

void start_cloudseg(const RunPtr& r) {
  r->mark("ready");
  QualityLevel target = r->cfg.cloudseg.quality;
  target.resolution_scale = std::min(target.resolution_scale, r->src().quality.resolution_scale);
  auto [small, enc_us] = reencode(r->src(), target, DeviceClass::client, r->cfg.size_model, r->cfg.encode_time);
  const std::int64_t bytes = small.encoded_bytes;
  r->after(enc_us, [r, bytes, target] {
    r->mark("encoded");
    r->lan(bytes, [r, bytes, target] {
      r->mark("at_fog");
      r->wan(r->env.wan_up, bytes, [r, target] {
        r->mark("at_cloud");
        const std::int64_t sr_us = ms_to_us(r->cfg.cloudseg.sr_ms_per_frame * r->n());
        r->cloud(sr_us, r->n(), [r, target] {
          r->mark("recovered");
          r->cloud(r->cloud_infer_us(r->n()), r->n(), [r, target] {
            r->mark("detected");
            QualityLevel eff = target;
            eff.resolution_scale = std::min(1.0, target.resolution_scale * r->cfg.cloudseg.upscale);
            DetectOptions opts;
            opts.extra_lambda_r = r->cfg.cloudseg.recovery_penalty;
            const auto dets =
                detect_frames(r->src().keyframes, eff, r->cfg.detector, r->env.content_seed(r->job), opts);
            accept_all(*r, dets, r->cfg.cloudseg.accept, LabelSource::cloud);
            r->wan(r->env.wan_down, static_cast<std::int64_t>(r->trace.labels.size()) * r->region_bytes(), [r] {
              r->mark("returned");
              stamp_labels(*r, 0);
              r->finish();
            });
          });
        });
      });
    });
  });
}

// ---------------------------------------------------------------- backup

void start_backup_run(const RunPtr& r) {
  r->trace.path = "backup";
  r->trace.state = "labeled_by_backup";
  r->mark("backup");
  auto detect = [r] {
    r->mark("at_fog");
    const std::int64_t us = ms_to_us(r->cfg.backup.infer_ms_fog * r->n());
    r->fog(us, [r] {
      r->mark("detected");
      const auto dets = backup_detect(r->src(), r->cfg.detector, r->cfg.backup, r->env.content_seed(r->job));
      accept_all(*r, dets, r->cfg.backup.accept, LabelSource::backup);
      stamp_labels(*r, 0);
      r->finish();
    });
  };
  // A retried chunk is already cached on the fog.
  if (r->job.prior) {
    detect();
  } else {
    r->lan(r->src().encoded_bytes, detect);
  }
}

void launch(SimEnv& env, const ChunkJob& job, std::function<void()> start) {
  if (job.ready_us > env.sim.now()) {
    env.sim.schedule_at(job.ready_us, std::move(start));
  } else {
    start();
  }
}

template <typename Start>
ChunkResult run_sync(SimEnv& env, Start start) {
  std::optional<ChunkResult> result;
  std::optional<ProtocolTrace> failed;
  start([&](ChunkResult r) { result = std::move(r); }, [&](ProtocolTrace t) { failed = std::move(t); });
  while (!result && !failed && env.sim.step()) {
  }
  if (failed) throw CloudUnavailable("cloud unreachable while processing chunk " + std::to_string(failed->chunk_id));
  if (!result) throw std::logic_error("simulation drained before the chunk finished");
  return std::move(*result);
}

}  // namespace

SimEnv::SimEnv(const ExperimentConfig& cfg, int classes)
    : lan(make_link("lan", cfg.network.lan, {})),
      wan_up(make_link("wan-up", cfg.network.wan, cfg.network.outages)),
      wan_down(make_link("wan-down", cfg.network.wan, cfg.network.outages)),
      cloud_pool(sim, WorkerPool::Config{kCloudDetector, cfg.cloud_replicas, cfg.autoscale.startup_us}),
      fog_pool(sim, WorkerPool::Config{"fog", cfg.fog_replicas, cfg.autoscale.startup_us}),
      functions(zoo),
      synth(classes, cfg.features, cfg.seed),
      learner(pretrained_learner(synth, cfg.hitl.learner, cfg.hitl.pretrain_scale)),
      cfg_(cfg),
      batcher_(cfg.protocol.batcher) {
  functions.register_function({kCloudDetector, FunctionKind::infer, DeviceClass::cloud,
                               CostCurve{0.0, cfg.detector.infer_ms_cloud}, cfg.cloud_replicas});
  functions.register_function(
      {kBackupDetector, FunctionKind::infer, DeviceClass::fog, CostCurve{0.0, cfg.backup.infer_ms_fog}, 1});
  functions.register_function({kFogClassifier, FunctionKind::infer, DeviceClass::fog, cfg.fog_classifier, 1});
  functions.register_function({kFogTrainer, FunctionKind::train, DeviceClass::fog, cfg.hitl.train_cost, 1});
}

std::uint64_t SimEnv::content_seed(const ChunkJob& job) const {
  return mix_seed({cfg_.seed, static_cast<std::uint64_t>(job.chunk->scene_index), static_cast<std::uint64_t>(job.cycle)});
}

std::uint64_t SimEnv::feature_seed(const ChunkJob& job) const {
  return mix_seed({cfg_.seed, kFeatureKey, static_cast<std::uint64_t>(job.chunk->scene_index),
                   static_cast<std::uint64_t>(job.cycle)});
}

std::int64_t SimEnv::classifier_latency_us(int batch) const {
  const ModelProfile* p = zoo.find_profile(kFogClassifier, DeviceClass::fog);
  const double ms = p ? p->latency_for(batch) : cfg_.fog_classifier.latency_ms(batch);
  return ms_to_us(ms);
}

void SimEnv::classify(Eigen::VectorXd x, std::function<void(const Prediction&, std::int64_t)> done) {
  const std::int64_t id = next_item_++;
  pending_.emplace(id, Pending{std::move(x), std::move(done)});
  if (auto batch = batcher_.push(DynamicBatcher::Item{id, sim.now()}, sim.now())) dispatch(std::move(*batch));
  arm_timer();
}

void SimEnv::dispatch(DynamicBatcher::Batch batch) {
  std::vector<Pending> items;
  for (const auto& item : batch.items) {
    auto it = pending_.find(item.id);
    items.push_back(std::move(it->second));
    pending_.erase(it);
  }
  const int n = static_cast<int>(items.size());
  fog_pool.submit(classifier_latency_us(n), [this, items = std::move(items)](std::int64_t, std::int64_t end) {
    // Predictions use the classifier as it is when the batch completes.
    for (const Pending& p : items) p.done(predict(p.x, learner), end);
  });
}

void SimEnv::arm_timer() {
  const auto d = batcher_.deadline();
  if (!d || (timer_at_ && *timer_at_ <= *d)) return;
  timer_at_ = *d;
  sim.schedule_at(*d, [this, t = *d] {
    if (timer_at_ != t) return;
    timer_at_.reset();
    if (auto batch = batcher_.on_timer(sim.now())) dispatch(std::move(*batch));
    arm_timer();
  });
}

void start_chunk(SimEnv& env, StrategyKind strategy, const ChunkJob& job, DoneFn done, FailFn fail) {
  auto r = std::make_shared<Run>(env, job, strategy, std::move(done), std::move(fail));
  launch(env, job, [r, strategy] {
    switch (strategy) {
      case StrategyKind::vpaas: return start_vpaas(r);
      case StrategyKind::mpeg: return start_mpeg(r);
      case StrategyKind::glimpse_like: return start_glimpse(r);
      case StrategyKind::dds_like: return start_dds(r);
      case StrategyKind::cloudseg_like: return start_cloudseg(r);
    }
  });
}

void start_backup(SimEnv& env, StrategyKind strategy, const ChunkJob& job, DoneFn done) {
  auto r = std::make_shared<Run>(env, job, strategy, std::move(done), nullptr);
  launch(env, job, [r] { start_backup_run(r); });
}

ChunkResult run_chunk(SimEnv& env, StrategyKind strategy, const ChunkJob& job) {
  return run_sync(env, [&](DoneFn d, FailFn f) { start_chunk(env, strategy, job, std::move(d), std::move(f)); });
}

ChunkResult run_backup(SimEnv& env, StrategyKind strategy, const ChunkJob& job) {
  return run_sync(env, [&](DoneFn d, FailFn) { start_backup(env, strategy, job, std::move(d)); });
}

}  // namespace hilo
