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

#include "hilo/annotation.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace hilo {

using nlohmann::json;

std::string to_string(TaskState s) {
  switch (s) {
    case TaskState::pending: return "pending";
    case TaskState::claimed: return "claimed";
    case TaskState::labeled: return "labeled";
    case TaskState::dismissed: return "dismissed";
  }
  return "pending";
}

json to_json(const AnnotationTask& t) {
  json boxes = json::array();
  for (const GroundTruthObject& o : t.frame.objects) {
    boxes.push_back({o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h});
  }
  return json{{"task_id", t.task_id},
              {"chunk_id", t.chunk_id},
              {"frame", t.frame_index},
              {"frame_size", {t.frame.width, t.frame.height}},
              {"region", {t.region.x, t.region.y, t.region.w, t.region.h}},
              {"boxes", std::move(boxes)},
              {"prediction", {{"class", t.predicted_class}, {"score", t.predicted_score}}},
              {"human_label", t.human_label ? json(*t.human_label) : json(nullptr)},
              {"state", to_string(t.state)},
              {"created_us", t.created_us}};
}

AnnotationQueue::AnnotationQueue(int budget) : budget_(budget) {
  if (budget < 0) throw InvariantError("annotation budget must be >= 0");
}

std::int64_t AnnotationQueue::enqueue(AnnotationTask task) {
  std::lock_guard lock(mu_);
  if (labeled_ + open_ >= budget_) throw BudgetExhausted("human labor budget exhausted");
  task.task_id = next_id_++;
  task.state = TaskState::pending;
  task.human_label.reset();
  pending_.push_back(task.task_id);
  ++open_;
  const std::int64_t id = task.task_id;
  tasks_.emplace(id, std::move(task));
  return id;
}

std::optional<AnnotationTask> AnnotationQueue::claim_next() {
  std::lock_guard lock(mu_);
  while (!pending_.empty()) {
    const std::int64_t id = pending_.front();
    pending_.pop_front();
    AnnotationTask& t = tasks_.at(id);
    if (t.state != TaskState::pending) continue;
    t.state = TaskState::claimed;
    return t;
  }
  return std::nullopt;
}

bool AnnotationQueue::claim(std::int64_t task_id) {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end() || it->second.state != TaskState::pending) return false;
  it->second.state = TaskState::claimed;
  pending_.erase(std::remove(pending_.begin(), pending_.end(), task_id), pending_.end());
  return true;
}

AnnotationTask AnnotationQueue::submit(std::int64_t task_id, int class_id, int classes) {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw UnknownTask("unknown task " + std::to_string(task_id));
  AnnotationTask& t = it->second;
  if (t.state == TaskState::labeled) throw TaskConflict("task " + std::to_string(task_id) + " is already labeled");
  if (t.state == TaskState::dismissed) throw TaskConflict("task " + std::to_string(task_id) + " was dismissed");
  if (labeled_ >= budget_) throw BudgetExhausted("human labor budget exhausted");
  if (class_id < 0 || class_id >= classes) throw InvariantError("class_id out of range");
  if (t.state == TaskState::pending) {
    pending_.erase(std::remove(pending_.begin(), pending_.end(), task_id), pending_.end());
  }
  t.state = TaskState::labeled;
  t.human_label = class_id;
  --open_;
  ++labeled_;
  return t;
}

void AnnotationQueue::dismiss(std::int64_t task_id) {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw UnknownTask("unknown task " + std::to_string(task_id));
  AnnotationTask& t = it->second;
  if (t.state == TaskState::labeled || t.state == TaskState::dismissed) {
    throw TaskConflict("task " + std::to_string(task_id) + " is closed");
  }
  if (t.state == TaskState::pending) {
    pending_.erase(std::remove(pending_.begin(), pending_.end(), task_id), pending_.end());
  }
  t.state = TaskState::dismissed;
  --open_;
}

std::optional<AnnotationTask> AnnotationQueue::get(std::int64_t task_id) const {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return std::nullopt;
  return it->second;
}

int AnnotationQueue::labeled() const {
  std::lock_guard lock(mu_);
  return labeled_;
}

int AnnotationQueue::open() const {
  std::lock_guard lock(mu_);
  return open_;
}

int AnnotationQueue::remaining() const {
  std::lock_guard lock(mu_);
  return budget_ - labeled_ - open_;
}

}  // namespace hilo
