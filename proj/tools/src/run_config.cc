// Copyright 2026 The qlbi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qlbi/cli/run_config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qlbi/error.h"

namespace qlbi::cli {
namespace {

using Json = nlohmann::ordered_json;

void reject_unknown(const Json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> keys(known.begin(), known.end());
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + (where.empty() ? "config" : where));
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for " + where + "." + key);
  }
}

void read_grid(const Json& j, const char* key, LinearGrid& g, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& o = j.at(key);
  const std::string w = where + "." + key;
  reject_unknown(o, w, {"min", "max", "steps"});
  read(o, "min", g.min, w);
  read(o, "max", g.max, w);
  read(o, "steps", g.steps, w);
}

Json grid_json(const LinearGrid& g) { return Json{{"min", g.min}, {"max", g.max}, {"steps", g.steps}}; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "", {"schema_version", "aperture", "basis", "scene", "protocol", "seed", "threads", "chart",
                         "simulate", "estimate", "output"});
  RunConfig c;
  if (!j.contains("schema_version")) throw ConfigError("config lacks schema_version");
  read(j, "schema_version", c.schema_version, "config");
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  }
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  if (j.contains("aperture")) {
    const auto& o = j["aperture"];
    reject_unknown(o, "aperture", {"delta", "r"});
    read(o, "delta", c.aperture.delta, "aperture");
    read(o, "r", c.aperture.r, "aperture");
  }
  if (j.contains("basis")) {
    const auto& o = j["basis"];
    reject_unknown(o, "basis", {"kind", "K"});
    read(o, "kind", c.basis.kind, "basis");
    read(o, "K", c.basis.K, "basis");
  }
  if (j.contains("scene")) {
    const auto& o = j["scene"];
    reject_unknown(o, "scene", {"theta", "brightness"});
    read(o, "theta", c.scene.theta, "scene");
    read(o, "brightness", c.scene.brightness, "scene");
  }
  if (j.contains("protocol")) {
    const auto& o = j["protocol"];
    reject_unknown(o, "protocol", {"M", "epsilon", "measurement"});
    read(o, "M", c.protocol.M, "protocol");
    read(o, "epsilon", c.protocol.epsilon, "protocol");
    read(o, "measurement", c.protocol.measurement, "protocol");
  }
  if (j.contains("chart")) {
    const auto& o = j["chart"];
    reject_unknown(o, "chart", {"theta", "r", "modes"});
    read_grid(o, "theta", c.chart.theta, "chart");
    read_grid(o, "r", c.chart.r, "chart");
    read(o, "modes", c.chart.modes, "chart");
  }
  if (j.contains("simulate")) {
    const auto& o = j["simulate"];
    reject_unknown(o, "simulate", {"photons", "mode"});
    read(o, "photons", c.simulate.photons, "simulate");
    read(o, "mode", c.simulate.mode, "simulate");
  }
  if (j.contains("estimate")) {
    const auto& o = j["estimate"];
    reject_unknown(o, "estimate", {"photons", "trials", "theta_max", "grid_points", "sampling"});
    read(o, "photons", c.estimate.photons, "estimate");
    read(o, "trials", c.estimate.trials, "estimate");
    read(o, "theta_max", c.estimate.theta_max, "estimate");
    read(o, "grid_points", c.estimate.grid_points, "estimate");
    read(o, "sampling", c.estimate.sampling, "estimate");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, "output", {"path"});
    read(o, "path", c.output.path, "output");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string emit_config(const RunConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["aperture"] = Json{{"delta", c.aperture.delta}, {"r", c.aperture.r}};
  j["basis"] = Json{{"kind", c.basis.kind}, {"K", c.basis.K}};
  j["scene"] = Json{{"theta", c.scene.theta}, {"brightness", c.scene.brightness}};
  j["protocol"] = Json{{"M", c.protocol.M}, {"epsilon", c.protocol.epsilon}, {"measurement", c.protocol.measurement}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["chart"] = Json{{"theta", grid_json(c.chart.theta)}, {"r", grid_json(c.chart.r)}, {"modes", c.chart.modes}};
  j["simulate"] = Json{{"photons", c.simulate.photons}, {"mode", c.simulate.mode}};
  j["estimate"] = Json{{"photons", c.estimate.photons},
                       {"trials", c.estimate.trials},
                       {"theta_max", c.estimate.theta_max},
                       {"grid_points", c.estimate.grid_points},
                       {"sampling", c.estimate.sampling}};
  j["output"] = Json{{"path", c.output.path}};
  return j.dump(2) + "\n";
}

void validate_config(const RunConfig& c) {
  require(c.schema_version == kSchemaVersion, "unsupported schema_version");
  require(finite(c.aperture.delta) && c.aperture.delta > 0.0, "aperture.delta must be > 0");
  require(finite(c.aperture.r) && c.aperture.r >= 0.0, "aperture.r must be >= 0");
  require(c.basis.kind == "psf-adapted" || c.basis.kind == "gaussian-hg",
          "basis.kind must be psf-adapted or gaussian-hg");
  require(c.basis.K >= 1 && c.basis.K <= 32, "basis.K must be in 1..32");
  require(finite(c.scene.theta) && c.scene.theta > 0.0, "scene.theta must be > 0");
  require(c.scene.brightness > 0.0 && c.scene.brightness < 1.0, "scene.brightness must be in (0, 1)");
  require(c.protocol.M >= 1, "protocol.M must be >= 1");
  require(c.protocol.epsilon > 0.0 && c.protocol.epsilon <= 0.1, "protocol.epsilon must be in (0, 0.1]");
  require(c.protocol.measurement == "parity" || c.protocol.measurement == "individual",
          "protocol.measurement must be parity or individual");
  require(c.threads >= 1 && c.threads <= 256, "threads must be in 1..256");
  for (const auto* g : {&c.chart.theta, &c.chart.r}) {
    require(g->steps >= 1, "chart grids must have at least one step");
    require(finite(g->min) && finite(g->max) && g->min <= g->max, "chart grid needs min <= max");
  }
  require(c.chart.theta.min > 0.0, "chart.theta.min must be > 0");
  require(c.chart.r.min >= 0.0, "chart.r.min must be >= 0");
  require(!c.chart.modes.empty(), "chart.modes must be nonempty");
  for (int K : c.chart.modes) require(K >= 1 && K <= 32, "chart.modes entries must be in 1..32");
  require(c.simulate.photons >= 0, "simulate.photons must be >= 0");
  require(c.simulate.mode == "fast" || c.simulate.mode == "full", "simulate.mode must be fast or full");
  require(c.estimate.photons >= 1, "estimate.photons must be >= 1");
  require(c.estimate.trials >= 30, "estimate.trials must be >= 30");
  require(finite(c.estimate.theta_max) && c.estimate.theta_max > 0.0, "estimate.theta_max must be > 0");
  require(c.estimate.grid_points >= 2, "estimate.grid_points must be >= 2");
  require(c.estimate.sampling == "fast" || c.estimate.sampling == "full", "estimate.sampling must be fast or full");
}

ApertureConfig make_aperture(const RunConfig& c) { return ApertureConfig::from_ratio(c.aperture.delta, c.aperture.r); }

ModeBasis make_basis(const RunConfig& c) {
  return build_basis(make_aperture(c), static_cast<std::size_t>(c.basis.K), parse_basis_kind(c.basis.kind));
}

Scene make_scene(const RunConfig& c) {
  const double theta = c.scene.theta * make_aperture(c).sigma();
  return Scene({{-theta, c.scene.brightness}, {theta, 1.0 - c.scene.brightness}});
}

MeasurementMode make_measurement(const RunConfig& c) {
  return c.protocol.measurement == "individual" ? MeasurementMode::kIndividual : MeasurementMode::kParity;
}

SamplingMode parse_sampling(const std::string& name) {
  if (name == "fast") return SamplingMode::kFast;
  if (name == "full") return SamplingMode::kFull;
  throw ConfigError("sampling mode must be fast or full");
}

ProtocolConfig make_protocol_config(const RunConfig& c) {
  ProtocolConfig pc;
  pc.aperture = make_aperture(c);
  pc.basis = make_basis(c);
  pc.scene = make_scene(c);
  pc.M = c.protocol.M;
  pc.epsilon = c.protocol.epsilon;
  pc.measurement = make_measurement(c);
  return pc;
}

EstimationConfig make_estimation_config(const RunConfig& c) {
  EstimationConfig ec;
  ec.aperture = make_aperture(c);
  ec.basis = make_basis(c);
  ec.M = c.protocol.M;
  ec.measurement = make_measurement(c);
  return ec;
}

ChartSpec make_chart_spec(const RunConfig& c) {
  ChartSpec spec;
  spec.delta = c.aperture.delta;
  spec.theta = c.chart.theta;
  spec.r = c.chart.r;
  spec.modes.assign(c.chart.modes.begin(), c.chart.modes.end());
  spec.kind = parse_basis_kind(c.basis.kind);
  spec.threads = c.threads;
  return spec;
}

}  // namespace qlbi::cli
