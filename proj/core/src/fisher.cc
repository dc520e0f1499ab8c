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

#include "qlbi/fisher.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "qlbi/error.h"
#include "text.h"

namespace qlbi {

double OutcomeDistribution::total() const {
  double s = 0.0;
  for (std::size_t q = 0; q < modes(); ++q) s += plus[q] + minus[q];
  return s;
}

std::vector<double> OutcomeDistribution::flat() const {
  std::vector<double> v;
  v.reserve(2 * modes());
  for (std::size_t q = 0; q < modes(); ++q) {
    v.push_back(plus[q]);
    v.push_back(minus[q]);
  }
  return v;
}

double OutcomeDistribution::max_abs_diff(const OutcomeDistribution& other) const {
  if (other.modes() != modes()) throw Error(ErrorKind::kLengthMismatch, "distributions over different K");
  double worst = 0.0;
  for (std::size_t q = 0; q < modes(); ++q) {
    worst = std::max({worst, std::abs(plus[q] - other.plus[q]), std::abs(minus[q] - other.minus[q])});
  }
  return worst;
}

double OutcomeDistribution::total_variation(const OutcomeDistribution& other) const {
  if (other.modes() != modes()) throw Error(ErrorKind::kLengthMismatch, "distributions over different K");
  double s = 0.0;
  for (std::size_t q = 0; q < modes(); ++q) {
    s += std::abs(plus[q] - other.plus[q]) + std::abs(minus[q] - other.minus[q]);
  }
  return 0.5 * s;
}

OutcomeDistribution outcome_probs(const ApertureConfig& aperture, const Scene& scene, const OverlapTable& table) {
  OutcomeDistribution dist(table.modes());
  for (std::size_t s = 0; s < scene.size(); ++s) {
    const double c = std::cos(aperture.beta() * scene[s].x);
    const double c2 = c * c;
    const double s2 = 1.0 - c2;
    for (std::size_t q = 0; q < table.modes(); ++q) {
      const double w = scene[s].brightness * table.eta[s][q] * table.eta[s][q];
      dist.plus[q] += c2 * w;
      dist.minus[q] += s2 * w;
    }
  }
  return dist;
}

OutcomeDistribution outcome_probs(const ApertureConfig& aperture, const ModeBasis& basis, const Scene& scene) {
  return outcome_probs(aperture, scene, overlaps(basis, scene));
}

double qfi(const ApertureConfig& aperture) {
  const double pi = std::numbers::pi;
  const double sigma = aperture.sigma();
  const double r = aperture.r();
  return 4.0 * pi * pi / (3.0 * sigma * sigma) * (3.0 * r * r + 1.0);
}

double cfi(const ApertureConfig& aperture, const ModeBasis& basis, double theta, const CfiOptions& options) {
  if (!(theta > 0.0)) throw Error(ErrorKind::kInvalidArgument, "cfi needs theta > 0");
  const auto probs = [&](double t) { return outcome_probs(aperture, basis, Scene::two_point(t)).flat(); };
  const double h = options.step * aperture.sigma();
  const auto center = probs(theta);
  const auto central = [&](double step) {
    const auto up = probs(theta + step);
    const auto down = probs(theta - step);
    std::vector<double> d(up.size());
    for (std::size_t o = 0; o < d.size(); ++o) d[o] = (up[o] - down[o]) / (2.0 * step);
    return d;
  };
  auto deriv = central(h);
  if (options.richardson) {
    const auto half = central(0.5 * h);
    for (std::size_t o = 0; o < deriv.size(); ++o) deriv[o] = (4.0 * half[o] - deriv[o]) / 3.0;
  }
  double total = 0.0;
  std::vector<double> curvature;
  for (std::size_t o = 0; o < center.size(); ++o) {
    const double d = deriv[o];
    if (!std::isfinite(d)) {
      throw Error(ErrorKind::kDerivativeFailure, "non-finite derivative for outcome " + std::to_string(o));
    }
    if (center[o] > options.vanishing) {
      total += d * d / center[o];
      continue;
    }
    // A zero of a smooth nonnegative P is a double zero: dP -> 0 and
    // (dP)^2/P -> 2 P''.
    if (std::abs(d) * aperture.sigma() > 1e-5) {
      throw Error(ErrorKind::kDerivativeFailure,
                  "outcome " + std::to_string(o) + " has P ~ 0 with a nonzero slope at theta=" + std::to_string(theta));
    }
    if (curvature.empty()) {
      const double h2 = 1e-4 * aperture.sigma();
      const auto up = probs(theta + h2);
      const auto down = probs(theta - h2);
      curvature.resize(center.size());
      for (std::size_t k = 0; k < center.size(); ++k) curvature[k] = (up[k] - 2.0 * center[k] + down[k]) / (h2 * h2);
    }
    total += 2.0 * std::max(0.0, curvature[o]);
  }
  return total;
}

std::vector<double> LinearGrid::values() const {
  if (steps < 1) throw Error(ErrorKind::kInvalidArgument, "grid needs at least one step");
  if (steps == 1) return {min};
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) v[i] = min + (max - min) * i / (steps - 1);
  return v;
}

std::vector<FisherResult> ratio_chart(const ChartSpec& spec) {
  const auto thetas = spec.theta.values();
  const auto rs = spec.r.values();
  if (thetas.empty() || rs.empty() || spec.modes.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "chart grids must be nonempty");
  }
  for (double t : thetas) {
    if (!(t > 0.0)) throw Error(ErrorKind::kInvalidArgument, "chart theta values must be > 0");
  }
  for (double r : rs) {
    if (!(r >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "chart r values must be >= 0");
  }
  const std::size_t kmax = *std::max_element(spec.modes.begin(), spec.modes.end());
  const ApertureConfig base(spec.delta, 0.0);
  const ModeBasis full = build_basis(base, kmax, spec.kind, spec.grid);
  std::vector<ModeBasis> bases;
  for (auto K : spec.modes) bases.push_back(full.truncated(K));

  std::vector<FisherResult> rows(thetas.size() * rs.size() * spec.modes.size());
  const auto fill = [&](std::size_t row) {
    const std::size_t nk = spec.modes.size();
    const std::size_t kidx = row % nk;
    const std::size_t ridx = (row / nk) % rs.size();
    const std::size_t tidx = row / (nk * rs.size());
    const auto aperture = ApertureConfig::from_ratio(spec.delta, rs[ridx]);
    const double theta = thetas[tidx] * aperture.sigma();
    FisherResult res;
    res.theta_over_sigma = thetas[tidx];
    res.r = rs[ridx];
    res.K = spec.modes[kidx];
    res.cfi = cfi(aperture, bases[kidx], theta, spec.cfi);
    res.qfi = qfi(aperture);
    res.ratio = res.cfi / res.qfi;
    rows[row] = res;
  };

  const int threads = std::max(1, spec.threads);
  if (threads == 1) {
    for (std::size_t row = 0; row < rows.size(); ++row) fill(row);
    return rows;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t row = t; row < rows.size(); row += threads) fill(row);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_chart_csv(std::ostream& out, const std::vector<FisherResult>& rows) {
  out << "theta_over_sigma,r,K,cfi,qfi,ratio\n";
  using internal::shortest;
  for (const auto& row : rows) {
    out << shortest(row.theta_over_sigma) << ',' << shortest(row.r) << ',' << row.K << ',' << shortest(row.cfi)
        << ',' << shortest(row.qfi) << ',' << shortest(row.ratio) << '\n';
  }
}

}  // namespace qlbi
