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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlbi/estimate.h"
#include "qlbi/fisher.h"
#include "qlbi/modes.h"
#include "qlbi/protocol.h"

namespace qlbi::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed or out-of-range configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command needs. Angles are in units of sigma.
struct RunConfig {
  int schema_version = kSchemaVersion;

  struct Aperture {
    double delta = 2.0 * 3.141592653589793;
    double r = 2.0;
    bool operator==(const Aperture&) const = default;
  } aperture;

  struct Basis {
    std::string kind = "psf-adapted";
    int K = 2;
    bool operator==(const Basis&) const = default;
  } basis;

  struct SceneSpec {
    double theta = 0.1;
    /// Brightness of the source at -theta; the other gets 1 - brightness.
    double brightness = 0.5;
    bool operator==(const SceneSpec&) const = default;
  } scene;

  struct ProtocolSpec {
    int M = 3;
    double epsilon = 0.01;
    std::string measurement = "parity";
    bool operator==(const ProtocolSpec&) const = default;
  } protocol;

  std::uint64_t seed = 1;
  int threads = 1;

  struct Chart {
    LinearGrid theta{0.01, 0.5, 25};
    LinearGrid r{0.0, 5.0, 11};
    std::vector<int> modes{1, 2, 4, 8};
    bool operator==(const Chart& o) const {
      return theta.min == o.theta.min && theta.max == o.theta.max && theta.steps == o.theta.steps &&
             r.min == o.r.min && r.max == o.r.max && r.steps == o.r.steps && modes == o.modes;
    }
  } chart;

  struct Simulate {
    std::int64_t photons = 100000;
    std::string mode = "full";
    bool operator==(const Simulate&) const = default;
  } simulate;

  struct Estimate {
    std::int64_t photons = 10000;
    std::int64_t trials = 200;
    double theta_max = 0.5;
    int grid_points = 512;
    std::string sampling = "fast";
    bool operator==(const Estimate&) const = default;
  } estimate;

  struct Output {
    std::string path;
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses a config document. Keys absent from the document keep their
/// defaults; unknown keys and type mismatches are config errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string emit_config(const RunConfig& config);

/// Checks every field against the module invariants. Throws ConfigError.
void validate_config(const RunConfig& config);

ApertureConfig make_aperture(const RunConfig& config);
ModeBasis make_basis(const RunConfig& config);
Scene make_scene(const RunConfig& config);
MeasurementMode make_measurement(const RunConfig& config);
SamplingMode parse_sampling(const std::string& name);
ProtocolConfig make_protocol_config(const RunConfig& config);
EstimationConfig make_estimation_config(const RunConfig& config);
ChartSpec make_chart_spec(const RunConfig& config);

}  // namespace qlbi::cli
