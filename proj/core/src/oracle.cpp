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

#include "hilo/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "hilo/random.hpp"

namespace hilo {

namespace {
constexpr std::uint64_t kFalseProposalKey = 0xF0F0F0F0ULL;
constexpr std::uint64_t kBackgroundKey = 0xBAC6ULL;
constexpr std::uint64_t kBackupSalt = 0xB4C0ULL;
}  // namespace

double DetectorProfile::infer_ms(DeviceClass device) const {
  switch (device) {
    case DeviceClass::client: return infer_ms_client;
    case DeviceClass::fog: return infer_ms_fog;
    case DeviceClass::cloud: return infer_ms_cloud;
  }
  return infer_ms_cloud;
}

void validate(const DetectorProfile& p) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.base_loc) || !in_unit(p.base_cls)) throw InvariantError("detector base scores must lie in [0,1]");
  if (p.lambda_q < 0 || p.lambda_q_loc < 0 || p.lambda_r < 0 || p.fp_rate < 0 || p.jitter < 0) {
    throw InvariantError("detector rates must be >= 0");
  }
  if (!(p.lambda_q_loc < p.lambda_q)) {
    throw InvariantError("detector.lambda_q_loc must be < detector.lambda_q");
  }
  if (p.qp_ref < 0 || p.qp_ref >= 51) throw InvariantError("detector.qp_ref out of range [0,51)");
  if (!in_unit(p.fp_loc_min) || !in_unit(p.fp_loc_max) || p.fp_loc_max < p.fp_loc_min) {
    throw InvariantError("detector false-proposal loc range must lie in [0,1]");
  }
  if (!in_unit(p.fp_large_fraction)) throw InvariantError("detector.fp_large_fraction must lie in [0,1]");
  if (p.infer_ms_client < 0 || p.infer_ms_fog < 0 || p.infer_ms_cloud < 0) {
    throw InvariantError("detector inference times must be >= 0");
  }
}

void validate(const BackupProfile& p) {
  if (p.cls_penalty < 0 || p.fp_multiplier < 0 || p.infer_ms_fog < 0) {
    throw InvariantError("backup parameters must be >= 0");
  }
  if (p.accept < 0 || p.accept > 1) throw InvariantError("backup.accept must lie in [0,1]");
}

Confidence object_confidence(const GroundTruthObject& obj, const QualityLevel& q, const DetectorProfile& p,
                             double extra_lambda_r) {
  const double q_loss = std::max(0, q.qp - p.qp_ref) / static_cast<double>(51 - p.qp_ref);
  const double r_loss = 1.0 - q.resolution_scale;
  Confidence c;
  c.cls = std::clamp(p.base_cls - obj.difficulty - p.lambda_q * q_loss - (p.lambda_r + extra_lambda_r) * r_loss,
                     0.0, 1.0);
  c.loc = std::clamp(p.base_loc - 0.5 * obj.difficulty - p.lambda_q_loc * q_loss -
                         0.3 * (p.lambda_r + extra_lambda_r) * r_loss,
                     0.0, 1.0);
  return c;
}

std::vector<FrameDetections> detect_frames(const std::vector<Frame>& frames, const QualityLevel& q,
                                           const DetectorProfile& p, std::uint64_t seed,
                                           const DetectOptions& opts) {
  std::vector<FrameDetections> out;
  out.reserve(frames.size());
  const double jitter = p.jitter * (1.0 - q.resolution_scale);
  for (const Frame& frame : frames) {
    FrameDetections fd;
    fd.frame_index = frame.frame_index;
    const auto findex = static_cast<std::uint64_t>(frame.frame_index);
    for (const GroundTruthObject& obj : frame.objects) {
      Rng rng(mix_seed({seed, opts.salt, findex, static_cast<std::uint64_t>(obj.object_id)}));
      std::uniform_real_distribution<double> sym(-1.0, 1.0);
      const Confidence c = object_confidence(obj, q, p, opts.extra_lambda_r);
      BBox b = obj.bbox;
      b.x += sym(rng) * jitter * obj.bbox.w;
      b.y += sym(rng) * jitter * obj.bbox.h;
      b.w *= 1.0 + sym(rng) * jitter;
      b.h *= 1.0 + sym(rng) * jitter;
      b = clamp_to_frame(b, frame.width, frame.height);
      if (!(b.area() > 0.0)) continue;
      Detection d;
      d.bbox = b;
      d.loc_score = c.loc;
      d.cls_score = c.cls;
      if (c.cls > 0.0) d.class_id = obj.class_id;
      fd.detections.push_back(d);
    }
    if (opts.false_proposals && p.fp_rate > 0.0) {
      Rng rng(mix_seed({seed, opts.salt, findex, kFalseProposalKey}));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const int n = std::poisson_distribution<int>(p.fp_rate)(rng);
      for (int i = 0; i < n; ++i) {
        Detection d;
        d.loc_score = p.fp_loc_min + (p.fp_loc_max - p.fp_loc_min) * unit(rng);
        d.cls_score = 0.0;
        const double fw = frame.width;
        const double fh = frame.height;
        if (unit(rng) < p.fp_large_fraction) {
          const double frac = 0.45 + 0.4 * unit(rng);
          const double side = std::sqrt(frac);
          d.bbox = BBox{(1.0 - side) * fw * unit(rng), (1.0 - side) * fh * unit(rng), side * fw, side * fh};
        } else {
          const double w = 30.0 + 120.0 * unit(rng);
          const double h = 30.0 + 120.0 * unit(rng);
          d.bbox = BBox{(fw - w) * unit(rng), (fh - h) * unit(rng), w, h};
        }
        d.bbox = clamp_to_frame(d.bbox, frame.width, frame.height);
        fd.detections.push_back(d);
      }
    }
    out.push_back(std::move(fd));
  }
  return out;
}

std::vector<FrameDetections> cloud_detect(const VideoChunk& chunk, const DetectorProfile& p, std::uint64_t seed) {
  return detect_frames(chunk.keyframes, chunk.quality, p, seed);
}

DetectorProfile backup_detector_profile(const DetectorProfile& cloud, const BackupProfile& backup) {
  DetectorProfile p = cloud;
  p.base_cls = std::max(0.0, cloud.base_cls - backup.cls_penalty);
  p.fp_rate = cloud.fp_rate * backup.fp_multiplier;
  p.infer_ms_fog = backup.infer_ms_fog;
  return p;
}

std::vector<FrameDetections> backup_detect(const VideoChunk& chunk, const DetectorProfile& cloud,
                                           const BackupProfile& backup, std::uint64_t seed) {
  const DetectorProfile p = backup_detector_profile(cloud, backup);
  DetectOptions opts;
  // An unpenalized backup is the cloud model itself and must agree with it.
  if (backup.cls_penalty != 0.0 || backup.fp_multiplier != 1.0) opts.salt = kBackupSalt;
  return detect_frames(chunk.keyframes, chunk.quality, p, seed, opts);
}

int dominant_object(const BBox& region, const Frame& frame) {
  int best = -1;
  double best_area = 0.0;
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const double a = intersection_area(region, frame.objects[i].bbox);
    if (a > best_area) {
      best_area = a;
      best = static_cast<int>(i);
    }
  }
  return best;
}

FeatureSynthesizer::FeatureSynthesizer(int classes, const Config& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (classes < 2) throw InvariantError("feature synthesizer needs >= 2 classes");
  if (cfg.dim < 1) throw InvariantError("features.dim must be >= 1");
  if (cfg.noise_sigma < 0.0 || cfg.drift_scale < 0.0) throw InvariantError("features noise/drift must be >= 0");
  Rng rng(mix_seed({seed, 0x9807ULL}));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.dim)));
  for (int k = 0; k < classes; ++k) {
    Eigen::VectorXd mu(cfg.dim);
    for (int i = 0; i < cfg.dim; ++i) mu[i] = normal(rng);
    prototypes_.push_back(std::move(mu));
  }
  for (int a = 0; a < classes; ++a) {
    for (int b = a + 1; b < classes; ++b) {
      if ((prototypes_[a] - prototypes_[b]).norm() == 0.0) throw InvariantError("prototypes must be distinct");
    }
  }
  // Each class drifts toward another class's prototype, which is the kind of
  // shift that actually confuses a frozen classifier.
  std::uniform_int_distribution<int> offset(1, classes - 1);
  for (int k = 0; k < classes; ++k) {
    const int target = (k + offset(rng)) % classes;
    Eigen::VectorXd u = prototypes_[target] - prototypes_[k];
    drift_.push_back(u / u.norm());
  }
}

Eigen::VectorXd FeatureSynthesizer::noise(std::uint64_t seed) const {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, cfg_.noise_sigma / std::sqrt(static_cast<double>(cfg_.dim)));
  Eigen::VectorXd e(cfg_.dim);
  for (int i = 0; i < cfg_.dim; ++i) e[i] = cfg_.noise_sigma > 0.0 ? normal(rng) : 0.0;
  return e;
}

Eigen::VectorXd FeatureSynthesizer::object_feature(const GroundTruthObject& obj, std::int64_t frame_index,
                                                   std::uint64_t seed) const {
  if (obj.class_id < 0 || obj.class_id >= classes()) throw InvariantError("object class outside synthesizer range");
  Eigen::VectorXd x(cfg_.dim + 1);
  x.head(cfg_.dim) = prototypes_[obj.class_id] + cfg_.drift_scale * obj.drift_phase * drift_[obj.class_id] +
                     noise(mix_seed({seed, static_cast<std::uint64_t>(frame_index),
                                     static_cast<std::uint64_t>(obj.object_id)}));
  x[cfg_.dim] = 1.0;
  return x;
}

Eigen::VectorXd FeatureSynthesizer::extract(const BBox& region, const Frame& frame, std::uint64_t seed) const {
  const int idx = dominant_object(region, frame);
  if (idx >= 0) return object_feature(frame.objects[idx], frame.frame_index, seed);
  Eigen::VectorXd x(cfg_.dim + 1);
  x.head(cfg_.dim) = noise(mix_seed({seed, kBackgroundKey, static_cast<std::uint64_t>(frame.frame_index),
                                     static_cast<std::uint64_t>(std::llround(region.x)),
                                     static_cast<std::uint64_t>(std::llround(region.y))}));
  x[cfg_.dim] = 1.0;
  return x;
}

}  // namespace hilo
