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

#include <cmath>
#include <cstring>
#include <random>

#include <nlohmann/json.hpp>

#include "hilo/learning.hpp"
#include "hilo/oracle.hpp"

using namespace hilo;

namespace {

LearnerState state_with(Eigen::MatrixXd w, double eta, SignMode mode) {
  LearnerState s;
  s.config.eta = eta;
  s.config.sign_mode = mode;
  s.weights = std::move(w);
  return s;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST_CASE("zero weights score zero and pick class 0") {
  const LearnerState s = state_with(Eigen::MatrixXd::Zero(3, 4), 0.05, SignMode::descent);
  const Prediction p = predict(vec({1, 2, 3, 1}), s);
  CHECK(p.class_id == 0);
  CHECK(p.scores.isZero());
  CHECK_THROWS_AS(predict(vec({1, 1}), s), DimensionError);
}

TEST_CASE("prototype rows classify noiseless features") {
  FeatureSynthesizer::Config cfg;
  cfg.noise_sigma = 0.0;
  const FeatureSynthesizer synth(5, cfg, 3);
  const LearnerState s = pretrained_learner(synth, LearnerConfig{});
  for (int k = 0; k < 5; ++k) {
    GroundTruthObject o;
    o.class_id = k;
    const Prediction p = predict(synth.object_feature(o, 0, 1), s);
    CHECK(p.class_id == k);
    CHECK(p.scores[k] == doctest::Approx(1.0));
  }
}

TEST_CASE("positive scaling keeps the argmax") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd w(4, 6);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
    Eigen::VectorXd x(6);
    for (Eigen::Index i = 0; i < 6; ++i) x[i] = n(rng);
    x[5] = 1.0;
    const double c = std::exp(n(rng));
    const auto a = predict(x, state_with(w, 0.1, SignMode::descent));
    const auto b = predict(x, state_with(c * w, 0.1, SignMode::descent));
    CHECK(a.class_id == b.class_id);
  }
}

TEST_CASE("printed update rule on the worked example") {
  LearnerState s = state_with(vec({1, 0}).transpose(), 0.1, SignMode::paper_faithful);
  CHECK(incremental_update(s, vec({1, 1}), +1, 0));
  CHECK(s.weights(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s.weights(0, 1) == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("no update when the activation is not positive") {
  Eigen::MatrixXd w(2, 3);
  w << 1, -2, 0.5, -1, 1, 0;
  for (SignMode mode : {SignMode::paper_faithful, SignMode::descent}) {
    LearnerState s = state_with(w, 0.3, mode);
    const Eigen::MatrixXd before = s.weights;
    CHECK_FALSE(incremental_update(s, vec({1, 1, -1}), +1, 0));  // 1 - 2 - 0.5 < 0
    CHECK_FALSE(incremental_update(s, vec({1, 1, 1}), -1, 1));   // exactly 0
    CHECK(same_bits(s.weights, before));
    CHECK(s.updates == 0);
  }
}

TEST_CASE("zero learning rate leaves weights alone") {
  LearnerState s = state_with(vec({1, 2}).transpose(), 0.0, SignMode::descent);
  const Eigen::MatrixXd before = s.weights;
  CHECK_FALSE(incremental_update(s, vec({1, 1}), +1, 0));
  CHECK(same_bits(s.weights, before));
}

TEST_CASE("descent update follows the finite-difference gradient") {
  // loss(W) = -y log relu(W.x); descent moves W by -eta * dloss/dW.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd w(5), x(5);
    for (int i = 0; i < 5; ++i) {
      w[i] = n(rng);
      x[i] = n(rng);
    }
    x[4] = 1.0;
    if (w.dot(x) <= 0.1) continue;
    const int y = trial % 2 == 0 ? 1 : -1;
    const double eta = 0.01;
    LearnerState s = state_with(w.transpose(), eta, SignMode::descent);
    REQUIRE(incremental_update(s, x, y, 0));
    const Eigen::VectorXd step = s.weights.row(0).transpose() - w;
    auto loss = [&](const Eigen::VectorXd& v) { return -y * std::log(std::max(v.dot(x), 1e-300)); };
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(w[i]));
      Eigen::VectorXd wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double grad = (loss(wp) - loss(wm)) / (2 * h);
      const double implied = -step[i] / eta;
      if (std::abs(grad) < 1e-9) {
        CHECK(std::abs(implied) < 1e-7);
      } else {
        CHECK(std::abs(implied - grad) / std::abs(grad) < 1e-6);
      }
    }
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("the two sign modes move the activation in opposite directions") {
  const Eigen::VectorXd x = vec({0.5, 1.0, 1.0});
  const Eigen::MatrixXd w = vec({1.0, 0.5, 0.2}).transpose();
  const double a0 = w.row(0).dot(x);
  const double delta = 0.05 * x.squaredNorm() / a0;
  LearnerState d = state_with(w, 0.05, SignMode::descent);
  LearnerState p = state_with(w, 0.05, SignMode::paper_faithful);
  incremental_update(d, x, +1, 0);
  incremental_update(p, x, +1, 0);
  CHECK(d.weights.row(0).dot(x) == doctest::Approx(a0 + delta));
  CHECK(p.weights.row(0).dot(x) == doctest::Approx(a0 - delta));
}

TEST_CASE("a human label raises the labeled class and snapshots") {
  FeatureSynthesizer::Config cfg;
  const FeatureSynthesizer synth(4, cfg, 8);
  LearnerState s = pretrained_learner(synth, LearnerConfig{});
  GroundTruthObject o;
  o.class_id = 2;
  const Eigen::VectorXd x = synth.object_feature(o, 3, 4);
  const Prediction before = predict(x, s);
  REQUIRE(before.class_id == 2);
  const std::string h0 = checkpoint_hash(s);
  apply_label(s, x, 2);  // agrees with the model
  CHECK(s.labeled == 1);
  CHECK(s.snapshots.size() == 1);
  CHECK(predict(x, s).scores[2] > before.scores[2]);
  CHECK(checkpoint_hash(s) != h0);
  CHECK_THROWS_AS(apply_label(s, x, 9), InvariantError);
}

TEST_CASE("a correcting label demotes rows that outscored the true class") {
  Eigen::MatrixXd w(3, 3);
  w << 0.2, 0.0, 0.1,  //
      1.0, 0.0, 0.0,   //
      0.0, 0.1, 0.0;
  LearnerState s = state_with(w, 0.1, SignMode::descent);
  const Eigen::VectorXd x = vec({1.0, 1.0, 1.0});
  const Eigen::VectorXd before = s.weights * x;  // 0.3, 1.0, 0.1
  apply_label(s, x, 0);
  const Eigen::VectorXd after = s.weights * x;
  CHECK(after[0] > before[0]);
  CHECK(after[1] < before[1]);
  CHECK(after[2] == before[2]);  // scored below the true class
}

TEST_CASE("ensemble weights: scalar normal equation") {
  Eigen::MatrixXd z(1, 1);
  z << 2.0;
  const Eigen::VectorXd w = solve_ensemble_weights(z, vec({2.0}), 0.0);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ensemble weights: zero targets and strong ridge") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd z(4, 9);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = u(rng);
  CHECK(solve_ensemble_weights(z, Eigen::VectorXd::Zero(9), 0.1).isZero());
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) y[i] = u(rng);
  CHECK(solve_ensemble_weights(z, y, 1e12).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(solve_ensemble_weights(singular, Eigen::VectorXd::Ones(3), 0.0), SingularSystemError);
}

TEST_CASE("ensemble weights satisfy the normal equations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int t = 1 + trial % 20, n = 5 + trial;
    Eigen::MatrixXd z(t, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = u(rng);
    for (int i = 0; i < n; ++i) y[i] = u(rng) < 0.3 ? 1.0 : 0.0;
    const double v = 0.1;
    const Eigen::VectorXd w = solve_ensemble_weights(z, y, v);
    Eigen::MatrixXd a = z * z.transpose();
    a.diagonal().array() += 2 * v;
    CHECK((a * w - z * y).norm() < 1e-8);
  }
}

TEST_CASE("finalize builds a per-class ensemble over the snapshots") {
  const FeatureSynthesizer synth(3, {}, 6);
  LearnerState s = pretrained_learner(synth, LearnerConfig{});
  std::vector<LabeledExample> labeled;
  for (int i = 0; i < 12; ++i) {
    GroundTruthObject o;
    o.object_id = i;
    o.class_id = i % 3;
    const Eigen::VectorXd x = synth.object_feature(o, i, 1);
    apply_label(s, x, o.class_id);
    labeled.push_back({x, o.class_id});
  }
  CHECK_THROWS_AS(snapshot_and_finalize(*std::make_unique<LearnerState>(), labeled), std::logic_error);
  snapshot_and_finalize(s, labeled);
  REQUIRE(s.omega);
  CHECK(s.omega->rows() == 3);
  CHECK(s.omega->cols() == 12);
  int right = 0;
  for (const auto& ex : labeled) right += predict(ex.x, s).class_id == ex.class_id;
  CHECK(right >= 10);
  CHECK(s.snapshots.size() <= static_cast<std::size_t>(s.config.budget));
}

TEST_CASE("checkpoints restore exactly") {
  const FeatureSynthesizer synth(3, {}, 6);
  LearnerState s = pretrained_learner(synth, LearnerConfig{0.07, 50, 0.2, SignMode::paper_faithful});
  GroundTruthObject o;
  o.class_id = 1;
  apply_label(s, synth.object_feature(o, 0, 1), 1);
  const LearnerState r = restore_checkpoint(checkpoint(s));
  CHECK(checkpoint(r).dump() == checkpoint(s).dump());
  CHECK(checkpoint_hash(r) == checkpoint_hash(s));
  CHECK(r.config.sign_mode == SignMode::paper_faithful);
}

TEST_CASE("learner config validation") {
  CHECK_THROWS_AS(validate(LearnerConfig{-1.0, 10, 0.1, SignMode::descent}), InvariantError);
  CHECK_THROWS_AS(sign_mode_from_string("ascent"), InvariantError);
  CHECK(sign_mode_from_string(to_string(SignMode::paper_faithful)) == SignMode::paper_faithful);
}
