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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace hilo {

class FeatureSynthesizer;

/// How a labeled example moves the weights of its classifier row.
///  - paper_faithful: W <- W - eta * y * x / relu(W.x), the literal sign,
///    which lowers the score of positive examples.
///  - descent: W <- W + eta * y * x / relu(W.x), gradient descent on
///    -y * log relu(W.x).
/// Both leave W untouched when W.x <= 0.
enum class SignMode { paper_faithful, descent };

std::string to_string(SignMode m);
SignMode sign_mode_from_string(const std::string& s);

struct LearnerConfig {
  double eta = 0.05;
  int budget = 200;    // human labels available
  double ridge = 0.1;  // regularizer of the ensemble weights
  SignMode sign_mode = SignMode::descent;
};

void validate(const LearnerConfig& c);

/// One-vs-all last-layer classifier over features with an appended bias 1.
struct LearnerState {
  LearnerConfig config;
  Eigen::MatrixXd weights;                // classes x (dim + 1)
  std::vector<Eigen::MatrixXd> snapshots;  // weights after each labeled example
  /// Per-class ensemble weights over the snapshots (classes x snapshots).
  std::optional<Eigen::MatrixXd> omega;
  int updates = 0;  // row updates that changed the weights
  int labeled = 0;  // labeled examples consumed

  int classes() const { return static_cast<int>(weights.rows()); }
  int input_dim() const { return static_cast<int>(weights.cols()); }
};

/// Fog classifier pretrained on drift-free data: row k is prototype k,
/// scaled so that a clean example scores `scale` on its own class.
LearnerState pretrained_learner(const FeatureSynthesizer& features, const LearnerConfig& cfg, double scale = 1.0);

struct Prediction {
  int class_id = 0;
  Eigen::VectorXd scores;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// scores_k = relu(W_k . x), or the omega-weighted sum over snapshots once
/// the ensemble is finalized. Ties go to the lowest class index.
Prediction predict(const Eigen::VectorXd& x, const LearnerState& state);

/// Single-row update with label y in {-1, +1}. Returns true if W changed.
bool incremental_update(LearnerState& state, const Eigen::VectorXd& x, int y, int class_id);

struct LabeledExample {
  Eigen::VectorXd x;
  int class_id = 0;
};

/// Applies a human label: y = +1 on the labeled row and y = -1 on every row
/// scoring above it, then stores a snapshot.
void apply_label(LearnerState& state, const Eigen::VectorXd& x, int class_id);

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ridge weights over snapshot outputs: solves (Z Z^T + 2 v I) w = Z y,
/// where Z is snapshots x examples.
Eigen::VectorXd solve_ensemble_weights(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double ridge);

/// Fits the per-class ensemble weights on the labeled set, reusing the
/// examples gathered during incremental learning.
void snapshot_and_finalize(LearnerState& state, std::span<const LabeledExample> labeled);

nlohmann::json checkpoint(const LearnerState& state);
LearnerState restore_checkpoint(const nlohmann::json& j);
/// Stable digest of the checkpoint, changes whenever any weight changes.
std::string checkpoint_hash(const LearnerState& state);

}  // namespace hilo
