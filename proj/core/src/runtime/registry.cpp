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

#include "hilo/runtime/registry.hpp"

#include <nlohmann/json.hpp>

namespace hilo {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<E, const char*> (&names)[N], const char* what) {
  for (const auto& [e, n] : names) {
    if (s == n) return e;
  }
  throw RegistryError(std::string("unknown ") + what + " '" + s + "'");
}

template <typename E, std::size_t N>
std::string enum_name(E e, const std::pair<E, const char*> (&names)[N]) {
  for (const auto& [v, n] : names) {
    if (v == e) return n;
  }
  return "?";
}

constexpr std::pair<FunctionKind, const char*> kKinds[] = {
    {FunctionKind::decode, "decode"}, {FunctionKind::encode, "encode"},
    {FunctionKind::preprocess, "preprocess"}, {FunctionKind::infer, "infer"},
    {FunctionKind::postprocess, "postprocess"}, {FunctionKind::train, "train"}};

constexpr std::pair<Trigger, const char*> kTriggers[] = {
    {Trigger::cloud_unreachable, "cloud_unreachable"},
    {Trigger::cloud_reachable, "cloud_reachable"},
    {Trigger::queue_depth_above, "queue_depth_above"},
    {Trigger::queue_depth_below, "queue_depth_below"}};

constexpr std::pair<Action, const char*> kActions[] = {{Action::use_cloud, "use_cloud"},
                                                       {Action::use_backup, "use_backup"},
                                                       {Action::scale_up, "scale_up"},
                                                       {Action::scale_down, "scale_down"},
                                                       {Action::hold, "hold"}};

bool is_routing(Action a) { return a == Action::use_cloud || a == Action::use_backup; }
bool is_scaling(Action a) { return a == Action::scale_up || a == Action::scale_down; }

}  // namespace

std::string to_string(FunctionKind k) { return enum_name(k, kKinds); }
FunctionKind function_kind_from_string(const std::string& s) { return parse_enum(s, kKinds, "function kind"); }
std::string to_string(Trigger t) { return enum_name(t, kTriggers); }
std::string to_string(Action a) { return enum_name(a, kActions); }
Trigger trigger_from_string(const std::string& s) { return parse_enum(s, kTriggers, "trigger"); }
Action action_from_string(const std::string& s) { return parse_enum(s, kActions, "action"); }

json to_json(const FunctionSpec& f) {
  return json{{"function_id", f.function_id},
              {"kind", to_string(f.kind)},
              {"device", to_string(f.device)},
              {"cost", {{"fixed_ms", f.cost.fixed_ms}, {"per_item_ms", f.cost.per_item_ms}}},
              {"replicas", f.replicas}};
}

FunctionSpec function_spec_from_json(const json& j) {
  FunctionSpec f;
  f.function_id = j.at("function_id").get<std::string>();
  f.kind = function_kind_from_string(j.value("kind", std::string("infer")));
  try {
    f.device = device_class_from_string(j.at("device").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw RegistryError(e.what());
  }
  if (j.contains("cost")) {
    f.cost.fixed_ms = j["cost"].value("fixed_ms", 0.0);
    f.cost.per_item_ms = j["cost"].value("per_item_ms", 0.0);
  }
  f.replicas = j.value("replicas", 1);
  return f;
}

FunctionRegistry::FunctionRegistry(ModelZoo& zoo, std::vector<int> profile_batches)
    : zoo_(zoo), profile_batches_(std::move(profile_batches)) {}

const std::string& FunctionRegistry::register_function(const FunctionSpec& spec) {
  if (spec.function_id.empty()) throw RegistryError("function_id must not be empty");
  if (spec.replicas < 0) throw RegistryError("replicas must be >= 0");
  if (spec.cost.fixed_ms < 0 || spec.cost.per_item_ms < 0) throw RegistryError("cost curve must be >= 0");
  std::lock_guard lock(mu_);
  if (functions_.count(spec.function_id)) throw RegistryError("duplicate function id '" + spec.function_id + "'");
  if (spec.kind == FunctionKind::infer) {
    if (!zoo_.has_model(spec.function_id, spec.device)) {
      zoo_.register_model(spec.function_id, spec.device, spec.cost);
    }
    zoo_.profile_model(spec.function_id, spec.device, profile_batches_);
  }
  return functions_.emplace(spec.function_id, spec).first->first;
}

bool FunctionRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return functions_.count(id) > 0;
}

FunctionSpec FunctionRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = functions_.find(id);
  if (it == functions_.end()) throw RegistryError("unknown function '" + id + "'");
  return it->second;
}

std::vector<FunctionSpec> FunctionRegistry::list() const {
  std::lock_guard lock(mu_);
  std::vector<FunctionSpec> out;
  for (const auto& [id, f] : functions_) out.push_back(f);
  return out;
}

json to_json(const Policy& p) {
  json rules = json::array();
  for (const Rule& r : p.rules) {
    json jr{{"when", to_string(r.trigger)}, {"then", to_string(r.action)}};
    if (r.trigger == Trigger::queue_depth_above || r.trigger == Trigger::queue_depth_below) {
      jr["threshold"] = r.threshold;
    }
    rules.push_back(std::move(jr));
  }
  json out{{"policy_id", p.policy_id}, {"rules", std::move(rules)}};
  out["default"] = p.default_action ? json(to_string(*p.default_action)) : json(nullptr);
  return out;
}

Policy policy_from_json(const json& j) {
  Policy p;
  p.policy_id = j.at("policy_id").get<std::string>();
  for (const json& jr : j.value("rules", json::array())) {
    Rule r;
    r.trigger = trigger_from_string(jr.at("when").get<std::string>());
    r.action = action_from_string(jr.at("then").get<std::string>());
    r.threshold = jr.value("threshold", 0.0);
    p.rules.push_back(r);
  }
  if (j.contains("default") && !j["default"].is_null()) {
    p.default_action = action_from_string(j["default"].get<std::string>());
  }
  return p;
}

Decision decide(const Policy& p, const PolicyContext& ctx) {
  std::optional<Action> routing;
  std::optional<Action> scaling;
  for (const Rule& r : p.rules) {
    bool hit = false;
    switch (r.trigger) {
      case Trigger::cloud_unreachable: hit = !ctx.cloud_reachable; break;
      case Trigger::cloud_reachable: hit = ctx.cloud_reachable; break;
      case Trigger::queue_depth_above: hit = ctx.queue_depth && *ctx.queue_depth > r.threshold; break;
      case Trigger::queue_depth_below: hit = ctx.queue_depth && *ctx.queue_depth < r.threshold; break;
    }
    if (!hit) continue;
    const bool depth_rule = r.trigger == Trigger::queue_depth_above || r.trigger == Trigger::queue_depth_below;
    if (depth_rule || is_scaling(r.action)) {
      if (!scaling) scaling = r.action;
    } else if (!routing) {
      routing = r.action;
    }
  }
  if (p.default_action) {
    if (is_scaling(*p.default_action)) {
      if (!scaling) scaling = p.default_action;
    } else if (!routing && (is_routing(*p.default_action) || *p.default_action == Action::hold)) {
      routing = p.default_action;
    }
  }
  Decision d;
  if (routing) {
    d.route = *routing == Action::use_backup ? Route::backup : *routing == Action::hold ? Route::wait : Route::cloud;
  }
  // The cloud cannot serve while it is unreachable, whatever the rules say.
  if (!ctx.cloud_reachable && d.route == Route::cloud) d.route = Route::wait;
  if (scaling) d.scale = *scaling == Action::scale_up ? 1 : *scaling == Action::scale_down ? -1 : 0;
  return d;
}

PolicyRegistry::PolicyRegistry(const Watermarks& w) {
  if (!(w.high > w.low)) throw RegistryError("autoscale high water must exceed low water");
  const Rule failover{Trigger::cloud_unreachable, 0.0, Action::use_backup};
  const Rule up{Trigger::queue_depth_above, w.high, Action::scale_up};
  const Rule down{Trigger::queue_depth_below, w.low, Action::scale_down};
  register_policy(Policy{"default", {failover, up, down}, Action::use_cloud});
  register_policy(Policy{"static", {failover}, Action::use_cloud});
  register_policy(Policy{"cloud-only", {{Trigger::cloud_unreachable, 0.0, Action::hold}}, Action::use_cloud});
  register_policy(Policy{"fog-only", {}, Action::use_backup});
}

const std::string& PolicyRegistry::register_policy(const Policy& p) {
  if (p.policy_id.empty()) throw RegistryError("policy_id must not be empty");
  if (!p.default_action) throw RegistryError("policy '" + p.policy_id + "' has no default action");
  std::lock_guard lock(mu_);
  if (policies_.count(p.policy_id)) throw RegistryError("duplicate policy id '" + p.policy_id + "'");
  return policies_.emplace(p.policy_id, p).first->first;
}

bool PolicyRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return policies_.count(id) > 0;
}

Policy PolicyRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = policies_.find(id);
  if (it == policies_.end()) throw RegistryError("unknown policy '" + id + "'");
  return it->second;
}

std::vector<std::string> PolicyRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, p] : policies_) out.push_back(id);
  return out;
}

}  // namespace hilo
