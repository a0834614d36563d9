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

#include "hilo/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hilo {

using nlohmann::json;

namespace {

constexpr std::pair<StrategyKind, const char*> kStrategies[] = {{StrategyKind::mpeg, "mpeg"},
                                                                {StrategyKind::glimpse_like, "glimpse_like"},
                                                                {StrategyKind::dds_like, "dds_like"},
                                                                {StrategyKind::cloudseg_like, "cloudseg_like"},
                                                                {StrategyKind::vpaas, "vpaas"}};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string range_text(double lo, double hi, bool lo_open, bool hi_open) {
  std::ostringstream os;
  os << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
  return os.str();
}

/// Reads one JSON object, recording every problem instead of stopping at
/// the first. Fields it was never asked about are reported as unknown.
class Section {
 public:
  Section(std::vector<ConfigIssue>& issues, const json* j, std::string path)
      : issues_(issues), j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) {
      issue("invalid_type", path_, "must be an object");
      j_ = nullptr;
    }
  }
  Section(const Section&) = delete;
  ~Section() {
    if (!j_) return;
    for (const auto& [key, value] : j_->items()) {
      if (!seen_.count(key)) issue("unknown_field", name(key), "unknown field");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_ && j_->contains(key) && !(*j_)[key].is_null();
  }

  void num(const char* key, double& out, double lo = -kInf, double hi = kInf, bool lo_open = false,
           bool hi_open = false) {
    if (!has(key)) return;
    const json& v = (*j_)[key];
    if (!v.is_number()) return issue("invalid_type", name(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || (lo_open ? x <= lo : x < lo) || (hi_open ? x >= hi : x > hi)) {
      return issue("out_of_range", name(key), "must be in " + range_text(lo, hi, lo_open, hi_open));
    }
    out = x;
  }

  void integer(const char* key, int& out, int lo = std::numeric_limits<int>::min(),
               int hi = std::numeric_limits<int>::max()) {
    if (!has(key)) return;
    const json& v = (*j_)[key];
    if (!v.is_number_integer()) return issue("invalid_type", name(key), "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) return issue("out_of_range", name(key), "must be in " + range_text(lo, hi, false, false));
    out = static_cast<int>(x);
  }

  void u64(const char* key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = (*j_)[key];
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      return issue("invalid_type", name(key), "must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = (*j_)[key];
    if (!v.is_boolean()) return issue("invalid_type", name(key), "must be a boolean");
    out = v.get<bool>();
  }

  void str(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = (*j_)[key];
    if (!v.is_string()) return issue("invalid_type", name(key), "must be a string");
    out = v.get<std::string>();
  }

  /// Parses a string field through `parse`, which throws on bad values.
  template <typename T, typename F>
  void choice(const char* key, T& out, F parse) {
    std::string s;
    if (!has(key)) return;
    if (!(*j_)[key].is_string()) return issue("invalid_type", name(key), "must be a string");
    s = (*j_)[key].get<std::string>();
    try {
      out = parse(s);
    } catch (const std::exception&) {
      issue("invalid_value", name(key), "unknown value '" + s + "'");
    }
  }

  const json* array(const char* key) {
    if (!has(key)) return nullptr;
    const json& v = (*j_)[key];
    if (!v.is_array()) {
      issue("invalid_type", name(key), "must be an array");
      return nullptr;
    }
    return &v;
  }

  const json* raw(const char* key) { return has(key) ? &(*j_)[key] : nullptr; }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::vector<ConfigIssue>& issues() { return issues_; }

  void issue(const std::string& code, const std::string& field, const std::string& message) {
    issues_.push_back(ConfigIssue{code, field, message});
  }

 private:
  std::vector<ConfigIssue>& issues_;
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_quality(Section& parent, const char* key, QualityLevel& q) {
  Section s(parent.issues(), parent.raw(key), parent.name(key));
  s.num("resolution_scale", q.resolution_scale, 0.0, 1.0, true, false);
  s.integer("qp", q.qp, 0, 51);
}

void read_cost(Section& parent, const char* key, CostCurve& c) {
  Section s(parent.issues(), parent.raw(key), parent.name(key));
  s.num("fixed_ms", c.fixed_ms, 0.0);
  s.num("per_item_ms", c.per_item_ms, 0.0);
}

void read_link(Section& parent, const char* key, LinkConfig& l) {
  Section s(parent.issues(), parent.raw(key), parent.name(key));
  s.num("bandwidth_mbps", l.bandwidth_mbps, 0.0, kInf, true);
  s.num("propagation_ms", l.propagation_ms, 0.0);
}

void read_dataset_spec(Section& s, DatasetSpec& d) {
  s.integer("scenes", d.scenes, 1);
  s.integer("frames", d.frames, 1);
  s.integer("width", d.width, 1);
  s.integer("height", d.height, 1);
  s.integer("classes", d.classes, 2);
  s.num("fps", d.fps, 0.0, kInf, true);
  s.num("objects_per_frame", d.objects_per_frame, 0.0);
  s.integer("min_lifetime", d.min_lifetime, 1);
  s.integer("max_lifetime", d.max_lifetime, 1);
  s.num("min_size", d.min_size, 1.0);
  s.num("max_size", d.max_size, 1.0);
  s.num("max_speed", d.max_speed, 0.0);
  s.num("min_difficulty", d.min_difficulty, 0.0, 1.0);
  s.num("max_difficulty", d.max_difficulty, 0.0, 1.0);
  s.num("drift_rate", d.drift_rate, 0.0);
}

template <typename F>
void check(std::vector<ConfigIssue>& issues, const std::string& field, F f) {
  try {
    f();
  } catch (const std::exception& e) {
    issues.push_back(ConfigIssue{"invalid_value", field, e.what()});
  }
}

}  // namespace

std::string to_string(StrategyKind s) {
  for (const auto& [k, n] : kStrategies) {
    if (k == s) return n;
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& s) {
  for (const auto& [k, n] : kStrategies) {
    if (s == n) return k;
  }
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> all = {StrategyKind::mpeg, StrategyKind::glimpse_like,
                                                StrategyKind::dds_like, StrategyKind::cloudseg_like,
                                                StrategyKind::vpaas};
  return all;
}

json to_json(const ConfigIssue& e) { return json{{"code", e.code}, {"field", e.field}, {"message", e.message}}; }

namespace {
std::string summarize(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid config:";
  for (const ConfigIssue& i : issues) out += "\n  " + i.field + ": " + i.message;
  return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

DatasetSpec dataset_spec_from_json(const json& j) {
  std::vector<ConfigIssue> issues;
  DatasetSpec d;
  {
    Section s(issues, &j, "");
    read_dataset_spec(s, d);
  }
  if (issues.empty()) check(issues, "spec", [&] { validate(d); });
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return d;
}

json to_json(const DatasetSpec& d) {
  return json{{"scenes", d.scenes},
              {"frames", d.frames},
              {"width", d.width},
              {"height", d.height},
              {"classes", d.classes},
              {"fps", d.fps},
              {"objects_per_frame", d.objects_per_frame},
              {"min_lifetime", d.min_lifetime},
              {"max_lifetime", d.max_lifetime},
              {"min_size", d.min_size},
              {"max_size", d.max_size},
              {"max_speed", d.max_speed},
              {"min_difficulty", d.min_difficulty},
              {"max_difficulty", d.max_difficulty},
              {"drift_rate", d.drift_rate}};
}

ExperimentConfig parse_config(const json& j) {
  std::vector<ConfigIssue> issues;
  ExperimentConfig c;
  {
    Section root(issues, &j, "");
    root.str("name", c.name);
    root.u64("seed", c.seed);
    root.choice("mode", c.mode, [](const std::string& s) {
      if (s == "batch") return ExperimentConfig::Mode::batch;
      if (s == "live") return ExperimentConfig::Mode::live;
      throw std::invalid_argument(s);
    });
    root.num("pacing", c.pacing, 0.0, kInf, true);
    root.choice("strategy", c.strategy, strategy_from_string);
    root.str("policy", c.policy);

    {
      Section d(issues, root.raw("dataset"), "dataset");
      d.str("path", c.dataset.path);
      d.str("id", c.dataset.id);
      d.u64("seed", c.dataset.seed);
      if (d.has("spec")) {
        Section s(issues, d.raw("spec"), "dataset.spec");
        DatasetSpec spec;
        read_dataset_spec(s, spec);
        c.dataset.spec = spec;
      }
    }
    {
      Section s(issues, root.raw("chunking"), "chunking");
      s.integer("keyframe_interval", c.chunking.keyframe_interval, 1);
      s.integer("keyframes_per_chunk", c.chunking.keyframes_per_chunk, 1);
    }
    {
      Section p(issues, root.raw("protocol"), "protocol");
      read_quality(p, "low_quality", c.protocol.low_quality);
      read_quality(p, "high_quality", c.protocol.high_quality);
      {
        Section t(issues, p.raw("thresholds"), "protocol.thresholds");
        t.num("loc", c.protocol.thresholds.loc, 0.0, 1.0, true, true);
        t.num("iou", c.protocol.thresholds.iou, 0.0, 1.0, true, true);
        t.num("back", c.protocol.thresholds.back, 0.0, 1.0, true, true);
        t.num("cls_accept", c.protocol.thresholds.cls_accept, 0.0, 1.0, true, true);
      }
      {
        Section b(issues, p.raw("batcher"), "protocol.batcher");
        b.integer("max_batch", c.protocol.batcher.max_batch, 1);
        b.num("max_wait_ms", c.protocol.batcher.max_wait_ms, 0.0);
      }
      p.num("fog_accept", c.protocol.fog_accept, 0.0, kInf);
      p.integer("bytes_per_region", c.protocol.bytes_per_region, 0);
    }
    {
      Section d(issues, root.raw("detector"), "detector");
      DetectorProfile& p = c.detector;
      d.num("base_loc", p.base_loc, 0.0, 1.0);
      d.num("base_cls", p.base_cls, 0.0, 1.0);
      d.num("lambda_q", p.lambda_q, 0.0);
      d.num("lambda_q_loc", p.lambda_q_loc, 0.0);
      d.num("lambda_r", p.lambda_r, 0.0);
      d.integer("qp_ref", p.qp_ref, 0, 50);
      d.num("fp_rate", p.fp_rate, 0.0);
      d.num("fp_loc_min", p.fp_loc_min, 0.0, 1.0);
      d.num("fp_loc_max", p.fp_loc_max, 0.0, 1.0);
      d.num("fp_large_fraction", p.fp_large_fraction, 0.0, 1.0);
      d.num("jitter", p.jitter, 0.0, 1.0);
      d.num("infer_ms_client", p.infer_ms_client, 0.0);
      d.num("infer_ms_fog", p.infer_ms_fog, 0.0);
      d.num("infer_ms_cloud", p.infer_ms_cloud, 0.0);
    }
    {
      Section b(issues, root.raw("backup"), "backup");
      b.num("cls_penalty", c.backup.cls_penalty, 0.0, 1.0);
      b.num("fp_multiplier", c.backup.fp_multiplier, 0.0);
      b.num("accept", c.backup.accept, 0.0, 1.0);
      b.num("infer_ms_fog", c.backup.infer_ms_fog, 0.0);
    }
    {
      Section f(issues, root.raw("features"), "features");
      f.integer("dim", c.features.dim, 1, 4096);
      f.num("noise_sigma", c.features.noise_sigma, 0.0);
      f.num("drift_scale", c.features.drift_scale, 0.0);
    }
    {
      Section s(issues, root.raw("size_model"), "size_model");
      s.num("base_bytes_per_pixel", c.size_model.base_bytes_per_pixel, 0.0, kInf, true);
      s.integer("qp_ref", c.size_model.qp_ref, 0, 51);
      s.integer("qp_halving", c.size_model.qp_halving, 1);
    }
    {
      Section s(issues, root.raw("encode_time"), "encode_time");
      s.num("client_s_per_mp", c.encode_time.client_s_per_mp, 0.0);
      s.num("fog_s_per_mp", c.encode_time.fog_s_per_mp, 0.0);
      s.num("cloud_s_per_mp", c.encode_time.cloud_s_per_mp, 0.0);
    }
    {
      Section n(issues, root.raw("network"), "network");
      read_link(n, "wan", c.network.wan);
      read_link(n, "lan", c.network.lan);
      if (const json* outages = n.array("outages")) {
        for (std::size_t i = 0; i < outages->size(); ++i) {
          Section o(issues, &(*outages)[i], "network.outages[" + std::to_string(i) + "]");
          OutageConfig oc;
          o.num("start_s", oc.start_s, 0.0);
          double end = -1.0;
          o.num("end_s", end, 0.0);
          if (end >= 0.0) {
            if (end < oc.start_s) o.issue("out_of_range", o.name("end_s"), "must be >= start_s");
            oc.end_s = end;
          }
          c.network.outages.push_back(oc);
        }
      }
    }
    {
      Section b(issues, root.raw("baselines"), "baselines");
      {
        Section g(issues, b.raw("glimpse"), "baselines.glimpse");
        g.num("diff_threshold", c.glimpse.diff_threshold, 0.0, 1.0);
        g.num("motion_px", c.glimpse.motion_px, 0.0);
      }
      {
        Section d(issues, b.raw("dds"), "baselines.dds");
        d.num("accept", c.dds.accept, 0.0, 1.0);
      }
      {
        Section s(issues, b.raw("cloudseg"), "baselines.cloudseg");
        read_quality(s, "quality", c.cloudseg.quality);
        s.num("upscale", c.cloudseg.upscale, 1.0);
        s.num("recovery_penalty", c.cloudseg.recovery_penalty, 0.0);
        s.num("sr_ms_per_frame", c.cloudseg.sr_ms_per_frame, 0.0);
        s.num("accept", c.cloudseg.accept, 0.0, 1.0);
      }
    }
    {
      Section f(issues, root.raw("fog"), "fog");
      read_cost(f, "classifier", c.fog_classifier);
      f.integer("replicas", c.fog_replicas, 1, 64);
    }
    {
      Section s(issues, root.raw("cloud"), "cloud");
      s.integer("replicas", c.cloud_replicas, 1, 1024);
    }
    {
      Section a(issues, root.raw("autoscale"), "autoscale");
      a.integer("min_replicas", c.autoscale.min_replicas, 1);
      a.integer("max_replicas", c.autoscale.max_replicas, 1);
      a.num("high_water", c.autoscale.high_water, 0.0);
      a.num("low_water", c.autoscale.low_water, 0.0);
      a.integer("window_samples", c.autoscale.window_samples, 1);
      double startup_s = static_cast<double>(c.autoscale.startup_us) / 1e6;
      a.num("startup_s", startup_s, 0.0);
      c.autoscale.startup_us = std::llround(startup_s * 1e6);
    }
    {
      Section h(issues, root.raw("heartbeat"), "heartbeat");
      double period_s = static_cast<double>(c.heartbeat.period_us) / 1e6;
      h.num("period_s", period_s, 0.0, kInf, true);
      c.heartbeat.period_us = std::llround(period_s * 1e6);
      h.integer("missed_beats", c.heartbeat.missed_beats, 1);
    }
    {
      Section m(issues, root.raw("monitor"), "monitor");
      double period_s = static_cast<double>(c.monitor_period_us) / 1e6;
      m.num("period_s", period_s, 0.0, kInf, true);
      c.monitor_period_us = std::llround(period_s * 1e6);
    }
    {
      Section h(issues, root.raw("hitl"), "hitl");
      HitlConfig& hc = c.hitl;
      h.boolean("enabled", hc.enabled);
      h.integer("budget", hc.learner.budget, 0);
      h.num("eta", hc.learner.eta, 0.0);
      h.num("ridge", hc.learner.ridge, 0.0);
      h.choice("sign_mode", hc.learner.sign_mode, sign_mode_from_string);
      h.num("pretrain_scale", hc.pretrain_scale, 0.0, kInf, true);
      h.num("sample_rate", hc.sample_rate, 0.0, 1.0);
      h.integer("max_tasks_per_chunk", hc.max_tasks_per_chunk, 0);
      h.boolean("finalize", hc.finalize);
      h.integer("train_batch", hc.train_batch, 1);
      read_cost(h, "train_cost", hc.train_cost);
      {
        Section a(issues, h.raw("annotator"), "hitl.annotator");
        a.choice("mode", hc.annotator.mode, [](const std::string& s) {
          if (s == "scripted") return AnnotatorConfig::Mode::scripted;
          if (s == "external") return AnnotatorConfig::Mode::external;
          throw std::invalid_argument(s);
        });
        a.num("delay_ms", hc.annotator.delay_ms, 0.0);
      }
    }
    {
      Section w(issues, root.raw("workload"), "workload");
      w.integer("cameras", c.workload.cameras, 1, 1000);
      w.num("duration_s", c.workload.duration_s, 0.0);
      if (const json* phases = w.array("phases")) {
        for (std::size_t i = 0; i < phases->size(); ++i) {
          Section p(issues, &(*phases)[i], "workload.phases[" + std::to_string(i) + "]");
          LoadPhase lp;
          p.num("start_s", lp.start_s, 0.0);
          p.integer("cameras", lp.cameras, 0, 1000);
          if (!c.workload.phases.empty() && lp.start_s < c.workload.phases.back().start_s) {
            p.issue("invalid_value", p.name("start_s"), "phases must be sorted by start_s");
          }
          c.workload.phases.push_back(lp);
        }
      }
    }
    {
      Section m(issues, root.raw("metrics"), "metrics");
      m.num("iou_match", c.metrics.iou_match, 0.0, 1.0, true, true);
      m.boolean("per_class", c.metrics.per_class);
      m.num("price_per_frame", c.metrics.price_per_frame, 0.0);
      m.num("slo_s", c.metrics.slo_s, 0.0, kInf, true);
    }
  }

  if (issues.empty()) {
    // Cross-field invariants owned by the individual modules.
    check(issues, "protocol.low_quality", [&] { validate(c.protocol.low_quality); });
    check(issues, "protocol.thresholds", [&] { validate(c.protocol.thresholds); });
    check(issues, "protocol.batcher", [&] { validate(c.protocol.batcher); });
    check(issues, "detector", [&] { validate(c.detector); });
    check(issues, "backup", [&] { validate(c.backup); });
    check(issues, "size_model", [&] { validate(c.size_model); });
    check(issues, "encode_time", [&] { validate(c.encode_time); });
    check(issues, "autoscale", [&] { validate(c.autoscale); });
    check(issues, "heartbeat", [&] { validate(c.heartbeat); });
    check(issues, "hitl", [&] { validate(c.hitl.learner); });
    if (c.dataset.spec) check(issues, "dataset.spec", [&] { validate(*c.dataset.spec); });
    const auto per_frame = [&](const QualityLevel& q) {
      return bytes_per_pixel(q, c.size_model) * q.resolution_scale * q.resolution_scale;
    };
    if (per_frame(c.protocol.low_quality) >= per_frame(c.protocol.high_quality)) {
      issues.push_back({"invalid_value", "protocol.low_quality", "must encode smaller than protocol.high_quality"});
    }
    if (c.protocol.high_quality.resolution_scale > 1.0) {
      issues.push_back({"invalid_value", "protocol.high_quality", "resolution_scale must be <= 1"});
    }
    if (c.cloud_replicas < c.autoscale.min_replicas || c.cloud_replicas > c.autoscale.max_replicas) {
      issues.push_back({"out_of_range", "cloud.replicas", "must lie within autoscale [min_replicas, max_replicas]"});
    }
    const int sources = (!c.dataset.path.empty()) + (!c.dataset.id.empty()) + (c.dataset.spec ? 1 : 0);
    if (sources > 1) issues.push_back({"invalid_value", "dataset", "give only one of path, id or spec"});
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({ConfigIssue{"io_error", "", "cannot read " + path}});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({ConfigIssue{"parse_error", "", e.what()}});
  }
  return parse_config(j);
}

namespace {
json quality_json(const QualityLevel& q) { return json{{"resolution_scale", q.resolution_scale}, {"qp", q.qp}}; }
json cost_json(const CostCurve& c) { return json{{"fixed_ms", c.fixed_ms}, {"per_item_ms", c.per_item_ms}}; }
json link_json(const LinkConfig& l) {
  return json{{"bandwidth_mbps", l.bandwidth_mbps}, {"propagation_ms", l.propagation_ms}};
}
}  // namespace

json to_json(const ExperimentConfig& c) {
  json dataset = json::object();
  if (!c.dataset.path.empty()) dataset["path"] = c.dataset.path;
  if (!c.dataset.id.empty()) dataset["id"] = c.dataset.id;
  if (c.dataset.spec) dataset["spec"] = to_json(*c.dataset.spec);
  dataset["seed"] = c.dataset.seed;

  json outages = json::array();
  for (const OutageConfig& o : c.network.outages) {
    json jo{{"start_s", o.start_s}};
    if (o.end_s) jo["end_s"] = *o.end_s;
    outages.push_back(jo);
  }
  json phases = json::array();
  for (const LoadPhase& p : c.workload.phases) phases.push_back({{"start_s", p.start_s}, {"cameras", p.cameras}});

  const DetectorProfile& d = c.detector;
  return json{
      {"name", c.name},
      {"seed", c.seed},
      {"mode", c.mode == ExperimentConfig::Mode::live ? "live" : "batch"},
      {"pacing", c.pacing},
      {"strategy", to_string(c.strategy)},
      {"policy", c.policy},
      {"dataset", dataset},
      {"chunking",
       {{"keyframe_interval", c.chunking.keyframe_interval}, {"keyframes_per_chunk", c.chunking.keyframes_per_chunk}}},
      {"protocol",
       {{"low_quality", quality_json(c.protocol.low_quality)},
        {"high_quality", quality_json(c.protocol.high_quality)},
        {"thresholds",
         {{"loc", c.protocol.thresholds.loc},
          {"iou", c.protocol.thresholds.iou},
          {"back", c.protocol.thresholds.back},
          {"cls_accept", c.protocol.thresholds.cls_accept}}},
        {"batcher", {{"max_batch", c.protocol.batcher.max_batch}, {"max_wait_ms", c.protocol.batcher.max_wait_ms}}},
        {"fog_accept", c.protocol.fog_accept},
        {"bytes_per_region", c.protocol.bytes_per_region}}},
      {"detector",
       {{"base_loc", d.base_loc},
        {"base_cls", d.base_cls},
        {"lambda_q", d.lambda_q},
        {"lambda_q_loc", d.lambda_q_loc},
        {"lambda_r", d.lambda_r},
        {"qp_ref", d.qp_ref},
        {"fp_rate", d.fp_rate},
        {"fp_loc_min", d.fp_loc_min},
        {"fp_loc_max", d.fp_loc_max},
        {"fp_large_fraction", d.fp_large_fraction},
        {"jitter", d.jitter},
        {"infer_ms_client", d.infer_ms_client},
        {"infer_ms_fog", d.infer_ms_fog},
        {"infer_ms_cloud", d.infer_ms_cloud}}},
      {"backup",
       {{"cls_penalty", c.backup.cls_penalty},
        {"fp_multiplier", c.backup.fp_multiplier},
        {"accept", c.backup.accept},
        {"infer_ms_fog", c.backup.infer_ms_fog}}},
      {"features",
       {{"dim", c.features.dim}, {"noise_sigma", c.features.noise_sigma}, {"drift_scale", c.features.drift_scale}}},
      {"size_model",
       {{"base_bytes_per_pixel", c.size_model.base_bytes_per_pixel},
        {"qp_ref", c.size_model.qp_ref},
        {"qp_halving", c.size_model.qp_halving}}},
      {"encode_time",
       {{"client_s_per_mp", c.encode_time.client_s_per_mp},
        {"fog_s_per_mp", c.encode_time.fog_s_per_mp},
        {"cloud_s_per_mp", c.encode_time.cloud_s_per_mp}}},
      {"network", {{"wan", link_json(c.network.wan)}, {"lan", link_json(c.network.lan)}, {"outages", outages}}},
      {"baselines",
       {{"glimpse", {{"diff_threshold", c.glimpse.diff_threshold}, {"motion_px", c.glimpse.motion_px}}},
        {"dds", {{"accept", c.dds.accept}}},
        {"cloudseg",
         {{"quality", quality_json(c.cloudseg.quality)},
          {"upscale", c.cloudseg.upscale},
          {"recovery_penalty", c.cloudseg.recovery_penalty},
          {"sr_ms_per_frame", c.cloudseg.sr_ms_per_frame},
          {"accept", c.cloudseg.accept}}}}},
      {"fog", {{"classifier", cost_json(c.fog_classifier)}, {"replicas", c.fog_replicas}}},
      {"cloud", {{"replicas", c.cloud_replicas}}},
      {"autoscale",
       {{"min_replicas", c.autoscale.min_replicas},
        {"max_replicas", c.autoscale.max_replicas},
        {"high_water", c.autoscale.high_water},
        {"low_water", c.autoscale.low_water},
        {"window_samples", c.autoscale.window_samples},
        {"startup_s", static_cast<double>(c.autoscale.startup_us) / 1e6}}},
      {"heartbeat",
       {{"period_s", static_cast<double>(c.heartbeat.period_us) / 1e6}, {"missed_beats", c.heartbeat.missed_beats}}},
      {"monitor", {{"period_s", static_cast<double>(c.monitor_period_us) / 1e6}}},
      {"hitl",
       {{"enabled", c.hitl.enabled},
        {"budget", c.hitl.learner.budget},
        {"eta", c.hitl.learner.eta},
        {"ridge", c.hitl.learner.ridge},
        {"sign_mode", to_string(c.hitl.learner.sign_mode)},
        {"pretrain_scale", c.hitl.pretrain_scale},
        {"sample_rate", c.hitl.sample_rate},
        {"max_tasks_per_chunk", c.hitl.max_tasks_per_chunk},
        {"finalize", c.hitl.finalize},
        {"train_batch", c.hitl.train_batch},
        {"train_cost", cost_json(c.hitl.train_cost)},
        {"annotator",
         {{"mode", c.hitl.annotator.mode == AnnotatorConfig::Mode::external ? "external" : "scripted"},
          {"delay_ms", c.hitl.annotator.delay_ms}}}}},
      {"workload", {{"cameras", c.workload.cameras}, {"phases", phases}, {"duration_s", c.workload.duration_s}}},
      {"metrics",
       {{"iou_match", c.metrics.iou_match},
        {"per_class", c.metrics.per_class},
        {"price_per_frame", c.metrics.price_per_frame},
        {"slo_s", c.metrics.slo_s}}}};
}

}  // namespace hilo
