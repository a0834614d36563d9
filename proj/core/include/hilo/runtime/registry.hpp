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

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hilo/datamodel.hpp"
#include "hilo/profiler.hpp"

namespace hilo {

class RegistryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FunctionKind { decode, encode, preprocess, infer, postprocess, train };

std::string to_string(FunctionKind k);
FunctionKind function_kind_from_string(const std::string& s);

struct FunctionSpec {
  std::string function_id;
  FunctionKind kind = FunctionKind::infer;
  DeviceClass device = DeviceClass::cloud;
  CostCurve cost;
  int replicas = 1;
};

nlohmann::json to_json(const FunctionSpec& f);
/// Throws RegistryError on unknown kind or device class.
FunctionSpec function_spec_from_json(const nlohmann::json& j);

/// Functions deployable on the fog and cloud. Registering an inference
/// function profiles it in the model zoo right away.
class FunctionRegistry {
 public:
  explicit FunctionRegistry(ModelZoo& zoo, std::vector<int> profile_batches = {1, 2, 4, 8});

  const std::string& register_function(const FunctionSpec& spec);
  bool contains(const std::string& id) const;
  /// Throws RegistryError for unknown ids.
  FunctionSpec get(const std::string& id) const;
  std::vector<FunctionSpec> list() const;
  ModelZoo& zoo() { return zoo_; }

 private:
  mutable std::mutex mu_;
  ModelZoo& zoo_;
  std::vector<int> profile_batches_;
  std::map<std::string, FunctionSpec> functions_;
};

enum class Trigger { cloud_unreachable, cloud_reachable, queue_depth_above, queue_depth_below };
enum class Action { use_cloud, use_backup, scale_up, scale_down, hold };

std::string to_string(Trigger t);
std::string to_string(Action a);
Trigger trigger_from_string(const std::string& s);
Action action_from_string(const std::string& s);

struct Rule {
  Trigger trigger = Trigger::cloud_unreachable;
  double threshold = 0.0;  // for queue depth triggers
  Action action = Action::hold;
};

/// Ordered trigger -> action rules. The default action applies when no rule
/// fires, which makes the rule set total.
struct Policy {
  std::string policy_id;
  std::vector<Rule> rules;
  std::optional<Action> default_action;
};

nlohmann::json to_json(const Policy& p);
Policy policy_from_json(const nlohmann::json& j);

struct PolicyContext {
  bool cloud_reachable = true;
  std::optional<double> queue_depth;  // unset outside provisioning rounds
};

enum class Route { cloud, backup, wait };

struct Decision {
  Route route = Route::cloud;
  int scale = 0;  // -1, 0, +1
};

/// First firing rule per concern (routing, scaling) wins. A concern no rule
/// speaks to falls back to the default action.
Decision decide(const Policy& p, const PolicyContext& ctx);

struct Watermarks {
  double high = 1.0;
  double low = 0.3;
};

class PolicyRegistry {
 public:
  /// Installs the built-ins: "default" (fail over to the backup detector and
  /// autoscale), "static" (fail over, fixed replicas), "cloud-only" (wait
  /// for the cloud to return) and "fog-only" (backup detector always).
  explicit PolicyRegistry(const Watermarks& w = {});

  /// Throws RegistryError on duplicate ids or a missing default action.
  const std::string& register_policy(const Policy& p);
  bool contains(const std::string& id) const;
  Policy get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Policy> policies_;
};

}  // namespace hilo
