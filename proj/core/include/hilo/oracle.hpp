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
#include <vector>

#include <Eigen/Core>

#include "hilo/datamodel.hpp"

namespace hilo {

/// Confidence model of an object detector. Classification confidence decays
/// faster with quality loss than location confidence (lambda_q_loc < lambda_q),
/// so a low-quality stream still tells where the objects are.
struct DetectorProfile {
  double base_loc = 0.95;
  double base_cls = 0.9;
  double lambda_q = 0.6;
  double lambda_q_loc = 0.15;
  double lambda_r = 0.5;
  int qp_ref = 26;
  double fp_rate = 0.3;
  double fp_loc_min = 0.4;
  double fp_loc_max = 0.7;
  /// Share of false proposals that cover a large part of the frame.
  double fp_large_fraction = 0.3;
  /// Bounding-box jitter, as a fraction of box size at resolution_scale 0.
  double jitter = 0.1;
  double infer_ms_client = 2000.0;
  double infer_ms_fog = 300.0;
  double infer_ms_cloud = 30.0;

  double infer_ms(DeviceClass device) const;
};

void validate(const DetectorProfile& p);

/// Parameters of the small detector the fog falls back to when the cloud
/// is unreachable.
struct BackupProfile {
  double cls_penalty = 0.25;
  double fp_multiplier = 3.0;
  /// Detections at or above this classification score become labels.
  double accept = 0.6;
  double infer_ms_fog = 40.0;
};

void validate(const BackupProfile& p);

struct Confidence {
  double loc = 0.0;
  double cls = 0.0;
};

/// Scores the detector assigns to `obj` when it sees it at quality `q`.
/// `extra_lambda_r` adds resolution sensitivity (used for recovered video).
Confidence object_confidence(const GroundTruthObject& obj, const QualityLevel& q, const DetectorProfile& p,
                             double extra_lambda_r = 0.0);

struct FrameDetections {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;

  bool operator==(const FrameDetections&) const = default;
};

struct DetectOptions {
  double extra_lambda_r = 0.0;
  /// Salt separating independent detectors that see the same frames.
  std::uint64_t salt = 0;
  bool false_proposals = true;
};

std::vector<FrameDetections> detect_frames(const std::vector<Frame>& frames, const QualityLevel& q,
                                           const DetectorProfile& p, std::uint64_t seed,
                                           const DetectOptions& opts = {});

std::vector<FrameDetections> cloud_detect(const VideoChunk& chunk, const DetectorProfile& p, std::uint64_t seed);

DetectorProfile backup_detector_profile(const DetectorProfile& cloud, const BackupProfile& backup);

/// The fog-side fallback detector: cloud_detect with a classification
/// penalty and more false proposals.
std::vector<FrameDetections> backup_detect(const VideoChunk& chunk, const DetectorProfile& cloud,
                                           const BackupProfile& backup, std::uint64_t seed);

/// Index of the object covering the largest part of `region`, or -1.
int dominant_object(const BBox& region, const Frame& frame);

/// Generates backbone features: one prototype per class, shifted along a
/// per-class drift direction by drift_scale * drift_phase, plus gaussian noise.
class FeatureSynthesizer {
 public:
  struct Config {
    int dim = 64;
    double noise_sigma = 0.3;  // expected norm of the noise vector
    double drift_scale = 1.0;
  };

  FeatureSynthesizer(int classes, const Config& cfg, std::uint64_t seed);

  int dim() const { return cfg_.dim; }
  int classes() const { return static_cast<int>(prototypes_.size()); }
  const Config& config() const { return cfg_; }
  const Eigen::VectorXd& prototype(int k) const { return prototypes_[k]; }
  const Eigen::VectorXd& drift_direction(int k) const { return drift_[k]; }

  /// Feature of the dominant object in `region`, with a trailing 1 for the
  /// bias. Regions over no object yield pure noise.
  Eigen::VectorXd extract(const BBox& region, const Frame& frame, std::uint64_t seed) const;
  Eigen::VectorXd object_feature(const GroundTruthObject& obj, std::int64_t frame_index, std::uint64_t seed) const;

 private:
  Eigen::VectorXd noise(std::uint64_t seed) const;

  Config cfg_;
  std::vector<Eigen::VectorXd> prototypes_;
  std::vector<Eigen::VectorXd> drift_;
};

}  // namespace hilo
