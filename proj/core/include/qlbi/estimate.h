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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qlbi/modes.h"
#include "qlbi/outcome.h"
#include "qlbi/protocol.h"

namespace qlbi {

class Rng;

/// Photon counts n_{q+-}.
struct CountTable {
  std::vector<std::uint64_t> plus;
  std::vector<std::uint64_t> minus;

  explicit CountTable(std::size_t K = 0) : plus(K, 0), minus(K, 0) {}

  std::size_t modes() const { return plus.size(); }
  std::uint64_t& at(std::size_t q, int sign) { return sign > 0 ? plus.at(q) : minus.at(q); }
  std::uint64_t at(std::size_t q, int sign) const { return sign > 0 ? plus.at(q) : minus.at(q); }
  std::uint64_t total() const;
  /// Counts as weights, flattened like OutcomeDistribution::flat().
  std::vector<double> weights() const;
};

enum class SamplingMode { kFast, kFull };

/// The two-point separation problem: equal sources at +-theta, centroid known.
struct EstimationConfig {
  ApertureConfig aperture{2.0 * 3.141592653589793, 0.0};
  ModeBasis basis;
  int M = 3;
  MeasurementMode measurement = MeasurementMode::kParity;
};

/// N detected photons at separation theta_true. Fast mode draws from the
/// analytic law; full mode runs the qubit-level protocol for each photon.
CountTable sample_photons(const EstimationConfig& config, double theta_true, std::uint64_t N, Rng& rng,
                          SamplingMode mode = SamplingMode::kFast);

/// sum_o w_o log P_o(theta); -infinity if an observed outcome has P_o = 0.
double log_likelihood(const EstimationConfig& config, double theta, const std::vector<double>& weights);
double log_likelihood(const EstimationConfig& config, double theta, const CountTable& counts);

struct MleOptions {
  /// Upper end of the search bracket (0, theta_max], in units of sigma.
  double theta_max = 0.5;
  int grid_points = 512;
  /// Golden-section tolerance, in units of sigma.
  double tolerance = 1e-6;
};

/// Grid scan over the bracket, then golden-section refinement around the best
/// grid point. The grid's outcome probabilities are computed once and shared
/// across solves.
class MleSolver {
 public:
  MleSolver(EstimationConfig config, MleOptions options = {});

  double solve(const std::vector<double>& weights) const;
  double solve(const CountTable& counts) const { return solve(counts.weights()); }

  const std::vector<double>& grid() const { return grid_; }

 private:
  double evaluate(const std::vector<double>& probs, const std::vector<double>& weights) const;

  EstimationConfig config_;
  MleOptions options_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> grid_probs_;
};

double mle(const EstimationConfig& config, const CountTable& counts, const MleOptions& options = {});

struct EstimationReport {
  double theta_true = 0.0;
  double theta_hat_mean = 0.0;
  double sample_variance = 0.0;
  double predicted_variance = 0.0;
  double cfi = 0.0;
  std::size_t trials = 0;
  std::uint64_t photons = 0;
  std::uint64_t seed = 0;
  std::vector<double> estimates;

  double variance_ratio() const { return sample_variance / predicted_variance; }
};

struct ExperimentOptions {
  MleOptions mle;
  SamplingMode sampling = SamplingMode::kFast;
  int threads = 1;
};

/// `trials` independent estimates from N photons each. Trial t draws from the
/// sub-stream derive_seed(seed, "estimate.trial", t), so the report does not
/// depend on thread count.
EstimationReport crb_experiment(const EstimationConfig& config, double theta_true, std::uint64_t N,
                                std::size_t trials, std::uint64_t seed, const ExperimentOptions& options = {});

std::string report_json(const EstimationReport& report);
/// `trial,theta_hat`
void write_trials_csv(std::ostream& out, const EstimationReport& report);

}  // namespace qlbi
