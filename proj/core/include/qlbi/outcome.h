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
#include <vector>

namespace qlbi {

/// Probability of each (spatial mode q, pairwise sign) outcome for one
/// detected photon.
struct OutcomeDistribution {
  std::vector<double> plus;
  std::vector<double> minus;

  explicit OutcomeDistribution(std::size_t K = 0) : plus(K, 0.0), minus(K, 0.0) {}

  std::size_t modes() const { return plus.size(); }
  double& at(std::size_t q, int sign) { return sign > 0 ? plus.at(q) : minus.at(q); }
  double at(std::size_t q, int sign) const { return sign > 0 ? plus.at(q) : minus.at(q); }
  double total() const;

  /// Flattened as [P_{0+}, P_{0-}, P_{1+}, ...].
  std::vector<double> flat() const;

  double max_abs_diff(const OutcomeDistribution& other) const;
  double total_variation(const OutcomeDistribution& other) const;
};

}  // namespace qlbi
