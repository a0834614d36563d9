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

#include <doctest.h>

#include "helpers.hpp"
#include "hilo/coordinator.hpp"
#include "hilo/oracle.hpp"

using namespace hilo;

TEST_CASE("full quality and zero difficulty keep the base scores") {
  const auto obj = testing::object(1, 0, {0, 0, 50, 50}, 0.0);
  const Confidence c = object_confidence(obj, {1.0, 26}, DetectorProfile{});
  CHECK(c.cls == doctest::Approx(0.9));
  CHECK(c.loc == doctest::Approx(0.95));
}

TEST_CASE("degraded quality lowers classification faster than location") {
  const auto obj = testing::object(1, 0, {0, 0, 50, 50}, 0.2);
  const Confidence c = object_confidence(obj, {0.8, 36}, DetectorProfile{});
  // 0.9 - 0.2 - 0.6*(10/25) - 0.5*0.2 and 0.95 - 0.1 - 0.15*(10/25) - 0.3*0.5*0.2
  CHECK(c.cls == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(c.loc == doctest::Approx(0.76).epsilon(1e-12));
  const Confidence worse = object_confidence(testing::object(1, 0, {0, 0, 50, 50}, 0.9), {0.2, 51}, {});
  CHECK(worse.cls == 0.0);
  CHECK(worse.loc >= 0.0);
}

TEST_CASE("detector profile invariants") {
  DetectorProfile p;
  CHECK_NOTHROW(validate(p));
  p.lambda_q_loc = p.lambda_q;
  CHECK_THROWS_AS(validate(p), InvariantError);
  p = {};
  p.base_cls = 1.5;
  CHECK_THROWS_AS(validate(p), InvariantError);
  BackupProfile b;
  b.accept = 2;
  CHECK_THROWS_AS(validate(b), InvariantError);
}

TEST_CASE("detection is deterministic per seed") {
  DatasetSpec spec;
  spec.frames = 60;
  const auto scenes = generate_dataset(spec, 4);
  std::vector<Frame> frames(scenes[0].frames.begin(), scenes[0].frames.begin() + 15);
  const auto a = detect_frames(frames, {0.8, 36}, DetectorProfile{}, 99);
  const auto b = detect_frames(frames, {0.8, 36}, DetectorProfile{}, 99);
  CHECK(a == b);
  const auto c = detect_frames(frames, {0.8, 36}, DetectorProfile{}, 100);
  CHECK_FALSE(a == c);
}

TEST_CASE("no objects and no false proposals give no detections") {
  DetectorProfile p;
  p.fp_rate = 0.0;
  const auto out = detect_frames(testing::frames_of(15), {1.0, 26}, p, 1);
  REQUIRE(out.size() == 15);
  for (const auto& fd : out) CHECK(fd.detections.empty());
}

TEST_CASE("backup detector recalls no more than the cloud model") {
  DatasetSpec spec;
  spec.frames = 900;
  spec.max_difficulty = 0.3;
  const auto scenes = generate_dataset(spec, 8);
  const auto chunks = make_chunks(scenes[0], 0, ChunkingConfig{}, SizeModel{});
  const DetectorProfile cloud;
  const BackupProfile backup;
  int cloud_hits = 0, backup_hits = 0;
  auto hits = [](const std::vector<FrameDetections>& dets, const std::vector<Frame>& frames, double accept) {
    int n = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      for (const auto& o : frames[i].objects) {
        for (const auto& d : dets[i].detections) {
          if (d.cls_score >= accept && d.class_id == o.class_id && iou(d.bbox, o.bbox) >= 0.5) {
            ++n;
            break;
          }
        }
      }
    }
    return n;
  };
  for (const auto& c : chunks) {
    cloud_hits += hits(cloud_detect(c.chunk, cloud, 5), c.chunk.keyframes, backup.accept);
    backup_hits += hits(backup_detect(c.chunk, cloud, backup, 5), c.chunk.keyframes, backup.accept);
  }
  CHECK(cloud_hits > 0);
  CHECK(backup_hits <= cloud_hits);
  CHECK(backup_hits < cloud_hits);
}

TEST_CASE("an unpenalized backup is the cloud model") {
  DatasetSpec spec;
  spec.frames = 300;
  const auto scenes = generate_dataset(spec, 2);
  const auto chunks = make_chunks(scenes[0], 0, ChunkingConfig{}, SizeModel{});
  BackupProfile same;
  same.cls_penalty = 0.0;
  same.fp_multiplier = 1.0;
  const DetectorProfile cloud;
  CHECK(backup_detect(chunks[0].chunk, cloud, same, 3) == cloud_detect(chunks[0].chunk, cloud, 3));
}

TEST_CASE("the backup model is cheaper on the fog than the cloud model") {
  const DetectorProfile cloud;
  const BackupProfile backup;
  CHECK(backup_detector_profile(cloud, backup).infer_ms(DeviceClass::fog) < cloud.infer_ms(DeviceClass::fog));
  CHECK(cloud.infer_ms(DeviceClass::client) > cloud.infer_ms(DeviceClass::fog));
}

TEST_CASE("noiseless features equal the class prototype") {
  FeatureSynthesizer::Config cfg;
  cfg.noise_sigma = 0.0;
  cfg.drift_scale = 0.0;
  const FeatureSynthesizer synth(4, cfg, 17);
  Frame f;
  f.width = 1280;
  f.height = 720;
  f.objects.push_back(testing::object(3, 2, {100, 100, 50, 50}));
  const Eigen::VectorXd x = synth.extract({110, 110, 40, 40}, f, 1);
  REQUIRE(x.size() == cfg.dim + 1);
  CHECK((x.head(cfg.dim) - synth.prototype(2)).norm() == 0.0);
  CHECK(x[cfg.dim] == 1.0);
}

TEST_CASE("features are deterministic and always end with the bias") {
  const FeatureSynthesizer synth(3, {}, 5);
  Frame f;
  f.frame_index = 7;
  f.width = 1280;
  f.height = 720;
  f.objects.push_back(testing::object(1, 1, {100, 100, 80, 80}));
  const auto a = synth.extract({100, 100, 80, 80}, f, 9);
  const auto b = synth.extract({105, 95, 70, 90}, f, 9);
  CHECK(a == b);
  CHECK(a[a.size() - 1] == 1.0);
  const auto bg = synth.extract({900, 600, 50, 50}, f, 9);
  CHECK(bg[bg.size() - 1] == 1.0);
}

TEST_CASE("drift moves features toward another class") {
  FeatureSynthesizer::Config cfg;
  cfg.noise_sigma = 0.0;
  const FeatureSynthesizer synth(4, cfg, 21);
  auto o = testing::object(1, 0, {0, 0, 10, 10});
  const auto x0 = synth.object_feature(o, 0, 1);
  o.drift_phase = 1.0;
  const auto x1 = synth.object_feature(o, 0, 1);
  CHECK((x1 - x0).head(cfg.dim).norm() == doctest::Approx(cfg.drift_scale));
  CHECK(synth.drift_direction(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("dominant object picks the largest overlap") {
  Frame f;
  f.objects.push_back(testing::object(1, 0, {0, 0, 10, 10}));
  f.objects.push_back(testing::object(2, 1, {5, 0, 20, 20}));
  CHECK(dominant_object({4, 0, 10, 10}, f) == 1);
  CHECK(dominant_object({0, 0, 4, 4}, f) == 0);
  CHECK(dominant_object({100, 100, 4, 4}, f) == -1);
}
