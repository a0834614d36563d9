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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hilo/dataset.hpp"
#include "hilo/engine.hpp"
#include "hilo/gateway.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOutput {
  json metrics;
  std::vector<hilo::ProtocolTrace> traces;
};

RunOutput run_one(const hilo::ExperimentConfig& cfg, std::shared_ptr<const std::vector<hilo::Scene>> scenes) {
  hilo::Engine engine(cfg, std::move(scenes));
  engine.run();
  return RunOutput{to_json(engine.metrics()), engine.traces()};
}

void write_outputs(const fs::path& dir, const RunOutput& out) {
  fs::create_directories(dir);
  std::ofstream(dir / "metrics.json") << out.metrics.dump(2) << '\n';
  std::ofstream traces(dir / "traces.jsonl");
  for (const hilo::ProtocolTrace& t : out.traces) traces << to_json(t).dump() << '\n';
}

hilo::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  json j;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw hilo::ConfigError({hilo::ConfigIssue{"io_error", "", "cannot read " + path}});
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw hilo::ConfigError({hilo::ConfigIssue{"parse_error", "", e.what()}});
    }
  } else {
    j = json::object();
  }
  if (seed) j["seed"] = *seed;
  return hilo::parse_config(j);
}

std::shared_ptr<const std::vector<hilo::Scene>> scenes_for(const hilo::ExperimentConfig& cfg) {
  if (!cfg.dataset.id.empty()) {
    throw hilo::ConfigError({hilo::ConfigIssue{"invalid_value", "dataset.id", "dataset ids only exist on a gateway"}});
  }
  hilo::DatasetRef ref = cfg.dataset;
  if (!ref.spec && ref.path.empty()) ref.spec = hilo::DatasetSpec{};
  return std::make_shared<const std::vector<hilo::Scene>>(hilo::resolve_dataset(ref));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hilo: high/low video streaming experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("generate-dataset", "write a synthetic dataset as JSON lines");
  std::string spec_path, gen_out;
  std::uint64_t gen_seed = 1;
  hilo::DatasetSpec spec;
  gen->add_option("--spec", spec_path, "dataset spec JSON file");
  gen->add_option("--out,-o", gen_out, "output path")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--scenes", spec.scenes);
  gen->add_option("--frames", spec.frames);
  gen->add_option("--objects", spec.objects_per_frame);
  gen->add_option("--drift-rate", spec.drift_rate);

  auto* run = app.add_subcommand("run", "run one experiment, write metrics.json and traces.jsonl");
  run->add_option("--config,-c", config_path, "experiment config JSON");
  run->add_option("--seed", seed, "overrides the config seed");
  run->add_option("--out,-o", out_dir, "output directory");
  std::string strategy;
  run->add_option("--strategy", strategy, "overrides the config strategy");

  auto* cmp = app.add_subcommand("compare", "run every strategy on one dataset and print a table");
  cmp->add_option("--config,-c", config_path, "experiment config JSON");
  cmp->add_option("--seed", seed, "overrides the config seed");
  cmp->add_option("--out,-o", out_dir, "output directory (one subdirectory per strategy)");

  auto* rep = app.add_subcommand("report", "print a comparison table from metrics files");
  std::vector<std::string> reports;
  rep->add_option("metrics", reports, "metrics.json files")->required()->check(CLI::ExistingFile);

  auto* srv = app.add_subcommand("serve", "start the HTTP gateway");
  hilo::GatewayOptions gw;
  srv->add_option("--host", gw.host);
  srv->add_option("--port", gw.port, "defaults to $HILO_PORT or 8080");
  srv->add_option("--static", gw.static_dir, "directory served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw std::runtime_error("cannot read " + spec_path);
        spec = hilo::dataset_spec_from_json(json::parse(in));
      }
      hilo::validate(spec);
      const auto scenes = hilo::generate_dataset(spec, gen_seed);
      hilo::save_dataset(gen_out, scenes);
      std::size_t frames = 0;
      for (const auto& s : scenes) frames += s.frames.size();
      std::cout << "wrote " << scenes.size() << " scenes, " << frames << " frames to " << gen_out << '\n';
    } else if (run->parsed()) {
      hilo::ExperimentConfig cfg = load(config_path, seed);
      if (!strategy.empty()) cfg.strategy = hilo::strategy_from_string(strategy);
      const RunOutput out = run_one(cfg, scenes_for(cfg));
      write_outputs(out_dir, out);
      std::cout << hilo::comparison_table({out.metrics});
    } else if (cmp->parsed()) {
      const hilo::ExperimentConfig base = load(config_path, seed);
      const auto scenes = scenes_for(base);
      std::vector<std::future<RunOutput>> runs;
      for (hilo::StrategyKind s : hilo::all_strategies()) {
        hilo::ExperimentConfig cfg = base;
        cfg.strategy = s;
        runs.push_back(std::async(std::launch::async, run_one, cfg, scenes));
      }
      std::vector<json> all;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        RunOutput out = runs[i].get();
        write_outputs(fs::path(out_dir) / hilo::to_string(hilo::all_strategies()[i]), out);
        all.push_back(std::move(out.metrics));
      }
      std::ofstream(fs::path(out_dir) / "compare.json") << json(all).dump(2) << '\n';
      std::cout << hilo::comparison_table(all);
    } else if (rep->parsed()) {
      std::vector<json> all;
      for (const std::string& p : reports) {
        std::ifstream in(p);
        json j = json::parse(in);
        if (j.is_array()) {
          for (json& r : j) all.push_back(std::move(r));
        } else {
          all.push_back(std::move(j));
        }
      }
      std::cout << hilo::comparison_table(all);
    } else if (srv->parsed()) {
      static hilo::Gateway* active = nullptr;
      hilo::Gateway gateway(gw);
      active = &gateway;
      const int port = gateway.bind();
      std::signal(SIGINT, [](int) {
        if (active) active->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (active) active->stop();
      });
      std::cout << "listening on " << gw.host << ':' << port << std::endl;
      gateway.serve();
      active = nullptr;
    }
  } catch (const hilo::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const hilo::ConfigIssue& i : e.issues()) {
      std::cerr << "  " << (i.field.empty() ? "<root>" : i.field) << ": " << i.message << " (" << i.code << ")\n";
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
