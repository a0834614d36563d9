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

#include <cstdio>
#include <filesystem>

#include "hilo/profiler.hpp"

using namespace hilo;

TEST_CASE("profiles are monotone in batch size") {
  ModelZoo zoo;
  zoo.register_model("det", DeviceClass::cloud, {30.0, 5.0});
  const ModelProfile p = zoo.profile_model("det", DeviceClass::cloud, {1, 4, 8});
  REQUIRE(p.latency_ms.size() == 3);
  double prev = 0.0;
  for (const auto& [batch, ms] : p.latency_ms) {
    CHECK(ms >= prev);
    prev = ms;
  }
  CHECK(p.latency_ms.at(4) == doctest::Approx(50.0));
}

TEST_CASE("profiling the same model twice reuses the profile") {
  ModelZoo zoo;
  zoo.register_model("det", DeviceClass::fog, {300.0, 10.0});
  const ModelProfile a = zoo.profile_model("det", DeviceClass::fog, {1, 2});
  const ModelProfile b = zoo.profile_model("det", DeviceClass::fog, {1, 2});
  CHECK(a == b);
  CHECK(zoo.profiling_runs() == 1);
  CHECK(zoo.find_profile("det", DeviceClass::fog) != nullptr);
  CHECK(zoo.find_profile("det", DeviceClass::cloud) == nullptr);
}

TEST_CASE("profiling errors") {
  ModelZoo zoo;
  zoo.register_model("det", DeviceClass::cloud, {30.0, 5.0});
  CHECK_THROWS_AS(zoo.profile_model("det", DeviceClass::cloud, {}), std::invalid_argument);
  CHECK_THROWS_AS(zoo.profile_model("nope", DeviceClass::cloud, {1}), UnknownModelError);
  CHECK_THROWS_AS(zoo.register_model("bad", DeviceClass::cloud, {-1.0, 0.0}), InvariantError);
}

TEST_CASE("latency interpolates and extrapolates") {
  ModelProfile p;
  p.latency_ms = {{1, 10.0}, {4, 40.0}};
  CHECK(p.latency_for(1) == doctest::Approx(10.0));
  CHECK(p.latency_for(2) == doctest::Approx(20.0));
  CHECK(p.latency_for(8) == doctest::Approx(80.0));
}

TEST_CASE("profiles persist") {
  const auto path = std::filesystem::temp_directory_path() / "hilo_zoo_test.json";
  ModelZoo zoo;
  zoo.register_model("det", DeviceClass::cloud, {30.0, 5.0});
  zoo.profile_model("det", DeviceClass::cloud, {1, 2, 4});
  zoo.save(path.string());
  ModelZoo restored;
  restored.load(path.string());
  REQUIRE(restored.find_profile("det", DeviceClass::cloud) != nullptr);
  CHECK(*restored.find_profile("det", DeviceClass::cloud) == *zoo.find_profile("det", DeviceClass::cloud));
  std::filesystem::remove(path);
}
