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

#include <random>

#include <benchmark/benchmark.h>

#include "hilo/coordinator.hpp"
#include "hilo/engine.hpp"
#include "hilo/learning.hpp"
#include "hilo/strategies.hpp"

using namespace hilo;

namespace {

std::vector<Detection> random_detections(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Detection> dets(static_cast<std::size_t>(n));
  for (auto& d : dets) {
    d.bbox = {1100 * u(rng), 600 * u(rng), 20 + 160 * u(rng), 20 + 100 * u(rng)};
    d.cls_score = u(rng);
    d.loc_score = u(rng);
    d.class_id = static_cast<int>(rng() % 10);
  }
  return dets;
}

void BM_FilterRegions(benchmark::State& state) {
  const auto dets = random_detections(static_cast<int>(state.range(0)), 1);
  const FilterThresholds t;
  for (auto _ : state) benchmark::DoNotOptimize(filter_regions(dets, 1280.0 * 720.0, t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterRegions)->Arg(8)->Arg(64)->Arg(256);

LearnerState random_learner(int classes, int dim) {
  LearnerState s;
  s.weights = Eigen::MatrixXd::Random(classes, dim + 1);
  return s;
}

void BM_Predict(benchmark::State& state) {
  const LearnerState s = random_learner(10, static_cast<int>(state.range(0)));
  const Eigen::VectorXd x = Eigen::VectorXd::Random(state.range(0) + 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict(x, s));
}
BENCHMARK(BM_Predict)->Arg(64)->Arg(512);

void BM_IncrementalUpdate(benchmark::State& state) {
  LearnerState s = random_learner(10, 64);
  Eigen::VectorXd x = Eigen::VectorXd::Random(65);
  int k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(incremental_update(s, x, 1, k));
    k = (k + 1) % 10;
  }
}
BENCHMARK(BM_IncrementalUpdate);

void BM_SolveEnsembleWeights(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Eigen::MatrixXd z = Eigen::MatrixXd::Random(10, m);
  const Eigen::VectorXd y = Eigen::VectorXd::Random(m);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ensemble_weights(z, y, 0.1));
}
BENCHMARK(BM_SolveEnsembleWeights)->Arg(50)->Arg(500);

void BM_ChunkSimulation(benchmark::State& state) {
  const auto kind = static_cast<StrategyKind>(state.range(0));
  ExperimentConfig cfg;
  DatasetSpec spec;
  spec.scenes = 1;
  spec.frames = 900;
  const Scene scene = generate_dataset(spec, 3)[0];
  const auto chunks = make_chunks(scene, 0, cfg.chunking, cfg.size_model);
  for (auto _ : state) {
    SimEnv env(cfg, scene.classes);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      ChunkJob job;
      job.job_id = static_cast<std::int64_t>(i);
      job.scene = &scene;
      job.chunk = &chunks[i];
      job.ready_us = chunks[i].ready_us;
      benchmark::DoNotOptimize(run_chunk(env, kind, job));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(chunks.size()));
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_ChunkSimulation)
    ->Arg(static_cast<int>(StrategyKind::vpaas))
    ->Arg(static_cast<int>(StrategyKind::dds_like))
    ->Arg(static_cast<int>(StrategyKind::mpeg))
    ->Unit(benchmark::kMillisecond);

void BM_EngineRun(benchmark::State& state) {
  const ExperimentConfig cfg = load_config(std::string(HILO_CONFIG_DIR) + "/" + (state.range(0) ? "drift.json" : "default.json"));
  const auto scenes = std::make_shared<const std::vector<Scene>>(resolve_dataset(cfg.dataset));
  for (auto _ : state) {
    Engine e(cfg, scenes);
    e.run();
    benchmark::DoNotOptimize(e.metrics());
  }
  state.SetLabel(state.range(0) ? "drift" : "default");
}
BENCHMARK(BM_EngineRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
