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

#include <nlohmann/json.hpp>

#include "hilo/runtime/registry.hpp"

using namespace hilo;

TEST_CASE("registering an inference function profiles it") {
  ModelZoo zoo;
  FunctionRegistry reg(zoo);
  reg.register_function({"det", FunctionKind::infer, DeviceClass::cloud, {30.0, 5.0}, 1});
  REQUIRE(zoo.find_profile("det", DeviceClass::cloud) != nullptr);
  CHECK(zoo.find_profile("det", DeviceClass::cloud)->latency_ms.size() == 4);
  CHECK(reg.contains("det"));
  CHECK(reg.get("det").cost.fixed_ms == 30.0);
  reg.register_function({"enc", FunctionKind::encode, DeviceClass::fog, {5.0, 1.0}, 1});
  CHECK(zoo.find_profile("enc", DeviceClass::fog) == nullptr);
  CHECK(reg.list().size() == 2);
}

TEST_CASE("function registry errors") {
  ModelZoo zoo;
  FunctionRegistry reg(zoo);
  reg.register_function({"det", FunctionKind::infer, DeviceClass::cloud, {30.0, 5.0}, 1});
  CHECK_THROWS_AS(reg.register_function({"det", FunctionKind::infer, DeviceClass::fog, {1, 1}, 1}), RegistryError);
  CHECK_THROWS_AS(reg.get("missing"), RegistryError);
  CHECK_THROWS_AS(function_spec_from_json(nlohmann::json{{"function_id", "x"}, {"kind", "dance"}}), RegistryError);
}

TEST_CASE("function spec JSON round trip") {
  const FunctionSpec f{"fog-classifier", FunctionKind::infer, DeviceClass::fog, {8.0, 2.0}, 2};
  const FunctionSpec back = function_spec_from_json(to_json(f));
  CHECK(back.function_id == f.function_id);
  CHECK(back.device == DeviceClass::fog);
  CHECK(back.cost.per_item_ms == 2.0);
  CHECK(back.replicas == 2);
}

TEST_CASE("policies need a default action and a unique id") {
  PolicyRegistry reg;
  CHECK_THROWS_AS(reg.register_policy(Policy{"partial", {}, std::nullopt}), RegistryError);
  CHECK_THROWS_AS(reg.register_policy(Policy{"default", {}, Action::use_cloud}), RegistryError);
  reg.register_policy(Policy{"mine", {}, Action::use_cloud});
  CHECK(reg.contains("mine"));
  CHECK_THROWS_AS(reg.get("nope"), RegistryError);
  for (const char* id : {"default", "static", "cloud-only", "fog-only"}) CHECK(reg.contains(id));
}

TEST_CASE("built-in policies route and scale") {
  PolicyRegistry reg(Watermarks{1.0, 0.3});
  const Policy def = reg.get("default");
  CHECK(decide(def, {true, std::nullopt}).route == Route::cloud);
  CHECK(decide(def, {false, std::nullopt}).route == Route::backup);
  CHECK(decide(def, {true, 2.0}).scale == 1);
  CHECK(decide(def, {true, 0.1}).scale == -1);
  CHECK(decide(def, {true, 0.5}).scale == 0);
  CHECK(decide(reg.get("static"), {true, 5.0}).scale == 0);
  CHECK(decide(reg.get("cloud-only"), {false, std::nullopt}).route == Route::wait);
  CHECK(decide(reg.get("fog-only"), {true, std::nullopt}).route == Route::backup);
}

TEST_CASE("an unreachable cloud never gets work") {
  const Policy p{"stubborn", {{Trigger::cloud_unreachable, 0, Action::use_cloud}}, Action::use_cloud};
  CHECK(decide(p, {false, std::nullopt}).route == Route::wait);
}

TEST_CASE("first firing rule per concern wins") {
  const Policy p{"p",
                 {{Trigger::queue_depth_above, 0.5, Action::scale_up},
                  {Trigger::queue_depth_above, 0.2, Action::scale_down},
                  {Trigger::cloud_reachable, 0, Action::use_backup}},
                 Action::use_cloud};
  const Decision d = decide(p, {true, 0.7});
  CHECK(d.scale == 1);
  CHECK(d.route == Route::backup);
}

TEST_CASE("policy JSON round trip") {
  const Policy p{"p", {{Trigger::queue_depth_below, 0.25, Action::scale_down}}, Action::hold};
  const Policy back = policy_from_json(to_json(p));
  CHECK(back.policy_id == "p");
  REQUIRE(back.rules.size() == 1);
  CHECK(back.rules[0].trigger == Trigger::queue_depth_below);
  CHECK(back.rules[0].threshold == 0.25);
  CHECK(*back.default_action == Action::hold);
  CHECK_THROWS_AS(trigger_from_string("sunrise"), RegistryError);
}
