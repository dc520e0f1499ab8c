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

#include "qlbi/estimate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "qlbi/error.h"
#include "qlbi/fisher.h"
#include "qlbi/rng.h"
#include "text.h"

namespace qlbi {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> model_probs(const EstimationConfig& config, double theta) {
  return outcome_probs(config.aperture, config.basis, Scene::two_point(theta)).flat();
}

double loglik(const std::vector<double>& probs, const std::vector<double>& weights) {
  if (probs.size() != weights.size()) throw Error(ErrorKind::kLengthMismatch, "counts and model differ in size");
  double s = 0.0;
  for (std::size_t o = 0; o < probs.size(); ++o) {
    if (weights[o] == 0.0) continue;
    if (probs[o] <= 0.0) return kNegInf;
    s += weights[o] * std::log(probs[o]);
  }
  return s;
}

}  // namespace

std::uint64_t CountTable::total() const {
  std::uint64_t n = 0;
  for (std::size_t q = 0; q < modes(); ++q) n += plus[q] + minus[q];
  return n;
}

std::vector<double> CountTable::weights() const {
  std::vector<double> w;
  for (std::size_t q = 0; q < modes(); ++q) {
    w.push_back(static_cast<double>(plus[q]));
    w.push_back(static_cast<double>(minus[q]));
  }
  return w;
}

CountTable sample_photons(const EstimationConfig& config, double theta_true, std::uint64_t N, Rng& rng,
                          SamplingMode mode) {
  if (N < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one photon");
  const std::size_t K = config.basis.size();
  CountTable counts(K);
  if (mode == SamplingMode::kFast) {
    const auto probs = model_probs(config, theta_true);
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t o = 0; o < probs.size(); ++o) cdf[o] = (acc += probs[o]);
    for (std::uint64_t n = 0; n < N; ++n) {
      const double u = rng.uniform() * acc;
      std::size_t o = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
      o = std::min(o, probs.size() - 1);
      // Skip zero-probability outcomes that upper_bound could land on.
      while (probs[o] == 0.0 && o > 0) --o;
      counts.at(o / 2, (o % 2 == 0) ? 1 : -1) += 1;
    }
    return counts;
  }
  ProtocolConfig pc;
  pc.aperture = config.aperture;
  pc.basis = config.basis;
  pc.scene = Scene::two_point(theta_true);
  pc.M = config.M;
  pc.measurement = config.measurement;
  const Protocol protocol(std::move(pc));
  for (std::uint64_t n = 0; n < N; ++n) {
    const auto rec = protocol.run_once(rng);
    counts.at(static_cast<std::size_t>(rec.q), rec.sign) += 1;
  }
  return counts;
}

double log_likelihood(const EstimationConfig& config, double theta, const std::vector<double>& weights) {
  return loglik(model_probs(config, theta), weights);
}

double log_likelihood(const EstimationConfig& config, double theta, const CountTable& counts) {
  return log_likelihood(config, theta, counts.weights());
}

MleSolver::MleSolver(EstimationConfig config, MleOptions options)
    : config_(std::move(config)), options_(options) {
  if (!(options_.theta_max > 0.0)) throw Error(ErrorKind::kInvalidArgument, "theta_max must be > 0");
  if (options_.grid_points < 2) throw Error(ErrorKind::kInvalidArgument, "MLE grid needs >= 2 points");
  const double top = options_.theta_max * config_.aperture.sigma();
  for (int i = 1; i <= options_.grid_points; ++i) {
    const double t = top * i / options_.grid_points;
    grid_.push_back(t);
    grid_probs_.push_back(model_probs(config_, t));
  }
}

double MleSolver::evaluate(const std::vector<double>& probs, const std::vector<double>& weights) const {
  return loglik(probs, weights);
}

double MleSolver::solve(const std::vector<double>& weights) const {
  std::size_t best = grid_.size();
  double best_ll = kNegInf;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double ll = evaluate(grid_probs_[i], weights);
    if (ll > best_ll) {  // strict: ties resolve to the smaller theta
      best_ll = ll;
      best = i;
    }
  }
  if (best == grid_.size()) {
    throw Error(ErrorKind::kEstimationImpossible, "log-likelihood is -infinity across the whole bracket");
  }
  const double step = grid_[0];
  double lo = best == 0 ? 0.5 * step : grid_[best - 1];
  double hi = best + 1 < grid_.size() ? grid_[best + 1] : grid_.back();
  const auto f = [&](double t) { return loglik(model_probs(config_, t), weights); };
  const double tol = options_.tolerance * config_.aperture.sigma();
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - invphi * (hi - lo);
  double b = lo + invphi * (hi - lo);
  double fa = f(a);
  double fb = f(b);
  while (hi - lo > tol) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - invphi * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + invphi * (hi - lo);
      fb = f(b);
    }
  }
  const double refined = 0.5 * (lo + hi);
  return f(refined) >= best_ll ? refined : grid_[best];
}

double mle(const EstimationConfig& config, const CountTable& counts, const MleOptions& options) {
  return MleSolver(config, options).solve(counts);
}

EstimationReport crb_experiment(const EstimationConfig& config, double theta_true, std::uint64_t N,
                                std::size_t trials, std::uint64_t seed, const ExperimentOptions& options) {
  if (trials < 30) throw Error(ErrorKind::kInvalidArgument, "CRB experiment needs at least 30 trials");
  if (!(theta_true > 0.0)) throw Error(ErrorKind::kInvalidArgument, "theta_true must be > 0");
  const MleSolver solver(config, options.mle);
  EstimationReport report;
  report.theta_true = theta_true;
  report.trials = trials;
  report.photons = N;
  report.seed = seed;
  report.estimates.assign(trials, 0.0);
  const auto run_trial = [&](std::size_t t) {
    Rng rng(derive_seed(seed, "estimate.trial", t));
    report.estimates[t] = solver.solve(sample_photons(config, theta_true, N, rng, options.sampling));
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < trials; t += threads) run_trial(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  double mean = 0.0;
  for (double e : report.estimates) mean += e;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double e : report.estimates) var += (e - mean) * (e - mean);
  var /= static_cast<double>(trials - 1);
  report.theta_hat_mean = mean;
  report.sample_variance = var;
  report.cfi = cfi(config.aperture, config.basis, theta_true);
  report.predicted_variance = 1.0 / (static_cast<double>(N) * report.cfi);
  return report;
}

std::string report_json(const EstimationReport& report) {
  nlohmann::ordered_json j;
  j["theta_true"] = report.theta_true;
  j["theta_hat_mean"] = report.theta_hat_mean;
  j["sample_variance"] = report.sample_variance;
  j["predicted_variance"] = report.predicted_variance;
  j["variance_ratio"] = report.variance_ratio();
  j["cfi"] = report.cfi;
  j["trials"] = report.trials;
  j["photons"] = report.photons;
  j["seed"] = report.seed;
  return j.dump(2);
}

void write_trials_csv(std::ostream& out, const EstimationReport& report) {
  out << "trial,theta_hat\n";
  for (std::size_t t = 0; t < report.estimates.size(); ++t) {
    out << t << ',' << internal::shortest(report.estimates[t]) << '\n';
  }
}

}  // namespace qlbi
