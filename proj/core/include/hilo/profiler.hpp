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
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hilo/datamodel.hpp"

namespace hilo {

/// Batch latency of a model on one device: fixed_ms + per_item_ms * batch.
struct CostCurve {
  double fixed_ms = 0.0;
  double per_item_ms = 0.0;

  double latency_ms(int batch) const { return fixed_ms + per_item_ms * batch; }
};

struct ModelProfile {
  std::string model_id;
  DeviceClass device = DeviceClass::cloud;
  std::map<int, double> latency_ms;  // batch size -> simulated ms
  std::string accuracy_note;

  /// Latency for `batch`; interpolates linearly between profiled sizes and
  /// extrapolates from the last two beyond the range.
  double latency_for(int batch) const;

  bool operator==(const ModelProfile&) const = default;
};

class UnknownModelError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Central store of model cost curves and measured profiles, keyed by
/// (model_id, device). Profiles are computed once per key and shared.
class ModelZoo {
 public:
  void register_model(const std::string& model_id, DeviceClass device, const CostCurve& curve,
                      std::string accuracy_note = {});
  bool has_model(const std::string& model_id, DeviceClass device) const;

  ModelProfile profile_model(const std::string& model_id, DeviceClass device, const std::vector<int>& batch_sizes);
  /// Cached profile, if one exists.
  const ModelProfile* find_profile(const std::string& model_id, DeviceClass device) const;
  int profiling_runs() const;

  nlohmann::json profiles_json() const;
  void save(const std::string& path) const;
  /// Restores persisted profiles; cost curves are not part of the record.
  void load(const std::string& path);

 private:
  using Key = std::pair<std::string, DeviceClass>;
  struct Entry {
    CostCurve curve;
    std::string note;
  };
  mutable std::mutex mu_;
  std::map<Key, Entry> models_;
  std::map<Key, ModelProfile> profiles_;
  int runs_ = 0;
};

}  // namespace hilo
