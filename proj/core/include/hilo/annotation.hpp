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
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "hilo/datamodel.hpp"

namespace hilo {

enum class TaskState { pending, claimed, labeled, dismissed };

std::string to_string(TaskState s);

struct AnnotationTask {
  std::int64_t task_id = 0;
  std::int64_t chunk_id = 0;
  std::int64_t frame_index = 0;
  BBox region;
  /// Boxes of the frame, for schematic rendering.
  Frame frame;
  Eigen::VectorXd feature;
  int predicted_class = 0;
  double predicted_score = 0.0;
  std::optional<int> human_label;
  TaskState state = TaskState::pending;
  std::int64_t created_us = 0;
};

/// Task as served to annotators (the feature vector is left out).
nlohmann::json to_json(const AnnotationTask& t);

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTask : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class TaskConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// FIFO of regions awaiting a human label. Open tasks plus consumed labels
/// never exceed the labor budget. All operations are atomic.
class AnnotationQueue {
 public:
  explicit AnnotationQueue(int budget);

  /// Returns the new task id. Throws BudgetExhausted when full.
  std::int64_t enqueue(AnnotationTask task);
  /// Claims the oldest pending task.
  std::optional<AnnotationTask> claim_next();
  /// Claims a specific pending task; false if it is not pending.
  bool claim(std::int64_t task_id);
  /// Records the label and returns the labeled task. Pending tasks are
  /// claimed implicitly. Throws UnknownTask, TaskConflict (already labeled
  /// or dismissed) or BudgetExhausted.
  AnnotationTask submit(std::int64_t task_id, int class_id, int classes);
  /// Drops a task without consuming budget (e.g. the region is background).
  void dismiss(std::int64_t task_id);

  std::optional<AnnotationTask> get(std::int64_t task_id) const;
  int budget() const { return budget_; }
  int labeled() const;
  int open() const;
  int remaining() const;

 private:
  mutable std::mutex mu_;
  int budget_;
  int labeled_ = 0;
  int open_ = 0;
  std::int64_t next_id_ = 1;
  std::deque<std::int64_t> pending_;
  std::map<std::int64_t, AnnotationTask> tasks_;
};

}  // namespace hilo
