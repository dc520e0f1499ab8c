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

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "qlbi/modes.h"
#include "qlbi/outcome.h"

namespace qlbi {

/// P_{q+} = sum_s b_s cos^2(beta x_s) eta_q^2(x_s), P_{q-} likewise with sin^2.
OutcomeDistribution outcome_probs(const ApertureConfig& aperture, const ModeBasis& basis, const Scene& scene);
OutcomeDistribution outcome_probs(const ApertureConfig& aperture, const Scene& scene, const OverlapTable& table);

struct CfiOptions {
  /// Central-difference step, in units of sigma.
  double step = 1e-6;
  /// Combine steps h and h/2 by Richardson extrapolation.
  bool richardson = true;
  /// Outcomes below this probability are treated as zeros of P.
  double vanishing = 1e-14;
};

/// Per-photon classical Fisher information sum_o (dP_o/dtheta)^2 / P_o for the
/// equal-brightness pair at +-theta with known centroid.
double cfi(const ApertureConfig& aperture, const ModeBasis& basis, double theta, const CfiOptions& options = {});

/// Per-photon QFI (4 pi^2 / 3 sigma^2)(3 r^2 + 1).
double qfi(const ApertureConfig& aperture);

struct FisherResult {
  double theta_over_sigma;
  double r;
  std::size_t K;
  double cfi;
  double qfi;
  double ratio;
};

/// Inclusive linear grid; steps == 1 yields {min}.
struct LinearGrid {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  std::vector<double> values() const;
};

struct ChartSpec {
  double delta = 2.0 * std::numbers::pi;
  LinearGrid theta{0.01, 0.5, 25};
  LinearGrid r{0.0, 5.0, 11};
  std::vector<std::size_t> modes{1, 2, 4, 8};
  BasisKind kind = BasisKind::kPsfAdapted;
  PupilGrid grid;
  CfiOptions cfi;
  int threads = 1;
};

/// CFI/QFI for every (theta/sigma, r, K), theta outermost and K innermost.
std::vector<FisherResult> ratio_chart(const ChartSpec& spec);

/// `theta_over_sigma,r,K,cfi,qfi,ratio` with 17 significant digits.
void write_chart_csv(std::ostream& out, const std::vector<FisherResult>& rows);

}  // namespace qlbi
