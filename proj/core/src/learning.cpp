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

#include "hilo/learning.hpp"

#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hilo/datamodel.hpp"
#include "hilo/oracle.hpp"

namespace hilo {

using nlohmann::json;

std::string to_string(SignMode m) { return m == SignMode::descent ? "descent" : "paper_faithful"; }

SignMode sign_mode_from_string(const std::string& s) {
  if (s == "descent") return SignMode::descent;
  if (s == "paper_faithful") return SignMode::paper_faithful;
  throw InvariantError("unknown sign_mode '" + s + "'");
}

void validate(const LearnerConfig& c) {
  if (!(c.eta >= 0.0) || !std::isfinite(c.eta)) throw InvariantError("hitl.eta must be finite and >= 0");
  if (c.budget < 0) throw InvariantError("hitl.budget must be >= 0");
  if (!(c.ridge >= 0.0)) throw InvariantError("hitl.ridge must be >= 0");
}

LearnerState pretrained_learner(const FeatureSynthesizer& features, const LearnerConfig& cfg, double scale) {
  validate(cfg);
  LearnerState s;
  s.config = cfg;
  s.weights = Eigen::MatrixXd::Zero(features.classes(), features.dim() + 1);
  for (int k = 0; k < features.classes(); ++k) {
    const Eigen::VectorXd& mu = features.prototype(k);
    s.weights.row(k).head(features.dim()) = (scale / mu.squaredNorm()) * mu.transpose();
  }
  return s;
}

namespace {

void check_dim(const Eigen::VectorXd& x, const LearnerState& s) {
  if (x.size() != s.input_dim()) {
    throw DimensionError("feature has " + std::to_string(x.size()) + " entries, classifier expects " +
                         std::to_string(s.input_dim()));
  }
}

}  // namespace

Prediction predict(const Eigen::VectorXd& x, const LearnerState& s) {
  check_dim(x, s);
  Prediction p;
  p.scores = Eigen::VectorXd::Zero(s.classes());
  if (s.omega) {
    const Eigen::MatrixXd& omega = *s.omega;
    for (std::size_t t = 0; t < s.snapshots.size(); ++t) {
      const Eigen::VectorXd raw = (s.snapshots[t] * x).cwiseMax(0.0);
      p.scores += omega.col(static_cast<Eigen::Index>(t)).cwiseProduct(raw);
    }
  } else {
    p.scores = (s.weights * x).cwiseMax(0.0);
  }
  p.class_id = 0;
  for (int k = 1; k < s.classes(); ++k) {
    if (p.scores[k] > p.scores[p.class_id]) p.class_id = k;
  }
  return p;
}

bool incremental_update(LearnerState& s, const Eigen::VectorXd& x, int y, int class_id) {
  check_dim(x, s);
  if (class_id < 0 || class_id >= s.classes()) throw InvariantError("class_id out of range");
  if (y != 1 && y != -1) throw InvariantError("label must be +1 or -1");
  const double activation = s.weights.row(class_id).dot(x);
  if (!(activation > 0.0)) return false;
  const double sign = s.config.sign_mode == SignMode::descent ? 1.0 : -1.0;
  const double step = sign * s.config.eta * y / activation;
  if (step == 0.0) return false;
  s.weights.row(class_id) += step * x.transpose();
  ++s.updates;
  return true;
}

void apply_label(LearnerState& s, const Eigen::VectorXd& x, int class_id) {
  check_dim(x, s);
  if (class_id < 0 || class_id >= s.classes()) throw InvariantError("class_id out of range");
  const Eigen::VectorXd before = s.weights * x;
  incremental_update(s, x, +1, class_id);
  for (int k = 0; k < s.classes(); ++k) {
    if (k != class_id && before[k] > before[class_id]) incremental_update(s, x, -1, k);
  }
  s.snapshots.push_back(s.weights);
  ++s.labeled;
}

Eigen::VectorXd solve_ensemble_weights(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double ridge) {
  if (z.cols() != y.size()) throw DimensionError("snapshot outputs and targets disagree in length");
  if (ridge < 0.0) throw InvariantError("ridge must be >= 0");
  Eigen::MatrixXd a = z * z.transpose();
  a.diagonal().array() += 2.0 * ridge;
  const Eigen::VectorXd b = z * y;
  if (ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw SingularSystemError("ensemble system is singular; use ridge > 0");
    Eigen::VectorXd w = lu.solve(b);
    w += lu.solve(b - a * w);
    return w;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("ensemble system could not be factored");
  Eigen::VectorXd w = ldlt.solve(b);
  // One refinement step keeps the normal-equation residual at rounding level.
  w += ldlt.solve(b - a * w);
  return w;
}

void snapshot_and_finalize(LearnerState& s, std::span<const LabeledExample> labeled) {
  if (s.snapshots.empty()) throw std::logic_error("finalize needs at least one snapshot");
  const auto t = static_cast<Eigen::Index>(s.snapshots.size());
  const auto n = static_cast<Eigen::Index>(labeled.size());
  Eigen::MatrixXd omega(s.classes(), t);
  for (int k = 0; k < s.classes(); ++k) {
    Eigen::MatrixXd z(t, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const LabeledExample& ex = labeled[static_cast<std::size_t>(i)];
      check_dim(ex.x, s);
      for (Eigen::Index j = 0; j < t; ++j) {
        z(j, i) = std::max(0.0, s.snapshots[static_cast<std::size_t>(j)].row(k).dot(ex.x));
      }
      y[i] = ex.class_id == k ? 1.0 : 0.0;
    }
    omega.row(k) = solve_ensemble_weights(z, y, s.config.ridge).transpose();
  }
  s.omega = std::move(omega);
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw DimensionError("ragged matrix in checkpoint");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

json checkpoint(const LearnerState& s) {
  json snaps = json::array();
  for (const Eigen::MatrixXd& w : s.snapshots) snaps.push_back(matrix_json(w));
  return json{{"config",
               {{"eta", s.config.eta},
                {"budget", s.config.budget},
                {"ridge", s.config.ridge},
                {"sign_mode", to_string(s.config.sign_mode)}}},
              {"weights", matrix_json(s.weights)},
              {"snapshots", std::move(snaps)},
              {"omega", s.omega ? matrix_json(*s.omega) : json(nullptr)},
              {"updates", s.updates},
              {"labeled", s.labeled}};
}

LearnerState restore_checkpoint(const json& j) {
  LearnerState s;
  const json& c = j.at("config");
  s.config.eta = c.at("eta").get<double>();
  s.config.budget = c.at("budget").get<int>();
  s.config.ridge = c.at("ridge").get<double>();
  s.config.sign_mode = sign_mode_from_string(c.at("sign_mode").get<std::string>());
  s.weights = matrix_from_json(j.at("weights"));
  for (const json& w : j.at("snapshots")) s.snapshots.push_back(matrix_from_json(w));
  if (!j.at("omega").is_null()) s.omega = matrix_from_json(j.at("omega"));
  s.updates = j.at("updates").get<int>();
  s.labeled = j.at("labeled").get<int>();
  return s;
}

std::string checkpoint_hash(const LearnerState& s) {
  // FNV-1a over the raw weight bytes and counters.
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  auto feed_matrix = [&](const Eigen::MatrixXd& m) {
    feed(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  };
  feed_matrix(s.weights);
  for (const Eigen::MatrixXd& w : s.snapshots) feed_matrix(w);
  if (s.omega) feed_matrix(*s.omega);
  feed(&s.updates, sizeof(s.updates));
  feed(&s.labeled, sizeof(s.labeled));
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace hilo
