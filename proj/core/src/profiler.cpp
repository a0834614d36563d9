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

#include "hilo/profiler.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace hilo {

using nlohmann::json;

double ModelProfile::latency_for(int batch) const {
  if (latency_ms.empty()) throw std::logic_error("empty model profile");
  auto hi = latency_ms.lower_bound(batch);
  if (hi != latency_ms.end() && hi->first == batch) return hi->second;
  if (latency_ms.size() == 1) return latency_ms.begin()->second;
  if (hi == latency_ms.begin()) ++hi;
  if (hi == latency_ms.end()) --hi;
  auto lo = std::prev(hi);
  const double slope = (hi->second - lo->second) / (hi->first - lo->first);
  return lo->second + slope * (batch - lo->first);
}

void ModelZoo::register_model(const std::string& model_id, DeviceClass device, const CostCurve& curve,
                              std::string accuracy_note) {
  if (curve.fixed_ms < 0 || curve.per_item_ms < 0) throw InvariantError("cost curve terms must be >= 0");
  std::lock_guard lock(mu_);
  models_[{model_id, device}] = Entry{curve, std::move(accuracy_note)};
}

bool ModelZoo::has_model(const std::string& model_id, DeviceClass device) const {
  std::lock_guard lock(mu_);
  return models_.count({model_id, device}) > 0;
}

ModelProfile ModelZoo::profile_model(const std::string& model_id, DeviceClass device,
                                     const std::vector<int>& batch_sizes) {
  if (batch_sizes.empty()) throw std::invalid_argument("profile_model needs at least one batch size");
  for (int b : batch_sizes) {
    if (b < 1) throw std::invalid_argument("batch sizes must be >= 1");
  }
  std::lock_guard lock(mu_);
  const Key key{model_id, device};
  auto cached = profiles_.find(key);
  if (cached != profiles_.end()) {
    bool covered = true;
    for (int b : batch_sizes) covered = covered && cached->second.latency_ms.count(b) > 0;
    if (covered) return cached->second;
  }
  auto model = models_.find(key);
  if (model == models_.end()) {
    throw UnknownModelError("unknown model '" + model_id + "' on " + to_string(device));
  }
  ModelProfile& profile = profiles_[key];
  profile.model_id = model_id;
  profile.device = device;
  profile.accuracy_note = model->second.note;
  for (int b : batch_sizes) profile.latency_ms[b] = model->second.curve.latency_ms(b);
  ++runs_;
  return profile;
}

const ModelProfile* ModelZoo::find_profile(const std::string& model_id, DeviceClass device) const {
  std::lock_guard lock(mu_);
  auto it = profiles_.find({model_id, device});
  return it == profiles_.end() ? nullptr : &it->second;
}

int ModelZoo::profiling_runs() const {
  std::lock_guard lock(mu_);
  return runs_;
}

json ModelZoo::profiles_json() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [key, p] : profiles_) {
    json lat = json::object();
    for (const auto& [b, ms] : p.latency_ms) lat[std::to_string(b)] = ms;
    out.push_back({{"model_id", p.model_id},
                   {"device_class", to_string(p.device)},
                   {"latency_ms", std::move(lat)},
                   {"accuracy_note", p.accuracy_note}});
  }
  return out;
}

void ModelZoo::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << profiles_json().dump(2) << '\n';
}

void ModelZoo::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const json records = json::parse(in);
  std::lock_guard lock(mu_);
  for (const json& r : records) {
    ModelProfile p;
    p.model_id = r.at("model_id").get<std::string>();
    p.device = device_class_from_string(r.at("device_class").get<std::string>());
    p.accuracy_note = r.value("accuracy_note", "");
    for (const auto& [b, ms] : r.at("latency_ms").items()) p.latency_ms[std::stoi(b)] = ms.get<double>();
    profiles_[{p.model_id, p.device}] = std::move(p);
  }
}

}  // namespace hilo
