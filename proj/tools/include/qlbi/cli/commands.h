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

#include <iosfwd>
#include <string>
#include <vector>

#include "qlbi/cli/run_config.h"

namespace qlbi::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Chart CSV; to `config.output.path`, or `out` when no path is set.
int cmd_chart(const RunConfig& config, std::ostream& out);

/// JSON-lines trace to `config.output.path` (skipped when empty) and the
/// summary JSON to `out`.
int cmd_simulate(const RunConfig& config, std::ostream& out);

/// Estimation report JSON to `config.output.path`, or `out`. Per-trial
/// estimates go to `trials_csv` when non-empty.
int cmd_estimate(const RunConfig& config, std::ostream& out, const std::string& trials_csv = "");

struct ValidationCheck {
  std::string name;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationOptions {
  /// Test fixture: drops the f correction in every protocol run.
  bool fault_skip_f_correction = false;
};

std::vector<ValidationCheck> run_validation(const RunConfig& config, const ValidationOptions& options = {});

/// Prints one line per check; exit 3 when any check fails.
int cmd_validate(const RunConfig& config, std::ostream& out, const ValidationOptions& options = {});

/// Full command line: parsing, config loading, flag overrides and dispatch.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qlbi::cli
