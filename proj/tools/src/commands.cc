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

#include "qlbi/cli/commands.h"

#include <unistd.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlbi/error.h"
#include "qlbi/estimate.h"
#include "qlbi/fisher.h"
#include "qlbi/protocol.h"
#include "qlbi/rng.h"

namespace qlbi::cli {
namespace {

using Json = nlohmann::ordered_json;

std::size_t pick_index(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc && weights[i] > 0.0) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

Json stage_json(const StageCounts& c) {
  return Json{{"inject", c.inject}, {"encode", c.encode}, {"measure", c.measure}, {"prepare", c.prepare},
              {"decode", c.decode}, {"flip", c.flip},     {"zeta", c.zeta}};
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into place at " + path + ": " + ec.message());
  }
}

int cmd_chart(const RunConfig& config, std::ostream& out) {
  const auto rows = ratio_chart(make_chart_spec(config));
  std::ostringstream csv;
  write_chart_csv(csv, rows);
  if (config.output.path.empty()) {
    out << csv.str();
  } else {
    write_atomic(config.output.path, csv.str());
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  const auto pc = make_protocol_config(config);
  const bool full = config.simulate.mode == "full";
  const auto table = overlaps(pc.basis, pc.scene);
  const auto analytic = outcome_probs(pc.aperture, pc.scene, table);
  const std::size_t K = pc.basis.size();
  std::optional<Protocol> protocol;
  if (full) protocol.emplace(pc);

  std::vector<double> brightness;
  for (const auto& src : pc.scene.sources()) brightness.push_back(src.brightness);

  OutcomeDistribution counts(K);
  std::ostringstream trace;
  const auto N = static_cast<std::uint64_t>(config.simulate.photons);
  for (std::uint64_t n = 0; n < N; ++n) {
    const std::uint64_t seed = derive_seed(config.seed, "simulate.run", n);
    Rng rng(seed);
    Json rec;
    rec["seed"] = seed;
    if (full) {
      const auto r = protocol->run_once(rng);
      rec["s"] = r.source;
      rec["m"] = r.m;
      rec["q"] = r.q;
      rec["N_m"] = r.flipped_pairs;
      rec["f"] = r.f;
      rec["sign"] = r.sign;
      rec["stages"] = stage_json(r.counts);
      counts.at(static_cast<std::size_t>(r.q), r.sign) += 1.0;
    } else {
      // Analytic sampling: s ~ b_s, m ~ U{1..M}, q ~ eta_q^2, sign ~ cos^2.
      const std::size_t s = pick_index(brightness, rng);
      const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(pc.M)));
      std::vector<double> eta2;
      for (double e : table.eta[s]) eta2.push_back(e * e);
      const std::size_t q = pick_index(eta2, rng);
      const double c = std::cos(pc.aperture.beta() * pc.scene[s].x);
      const int sign = rng.uniform() < c * c ? 1 : -1;
      rec["s"] = s;
      rec["m"] = m;
      rec["q"] = q;
      rec["N_m"] = std::popcount(static_cast<unsigned>(m));
      rec["f"] = nullptr;
      rec["sign"] = sign;
      rec["stages"] = nullptr;
      counts.at(q, sign) += 1.0;
    }
    trace << rec.dump() << '\n';
  }
  if (!config.output.path.empty()) write_atomic(config.output.path, trace.str());

  Json summary;
  summary["photons"] = N;
  summary["mode"] = config.simulate.mode;
  summary["seed"] = config.seed;
  summary["analytic"] = analytic.flat();
  if (N == 0) {
    summary["empirical"] = nullptr;
    summary["tv"] = nullptr;
    summary["tv_defined"] = false;
  } else {
    std::vector<double> emp = counts.flat();
    for (double& p : emp) p /= static_cast<double>(N);
    OutcomeDistribution empirical(K);
    for (std::size_t q = 0; q < K; ++q) {
      empirical.plus[q] = emp[2 * q];
      empirical.minus[q] = emp[2 * q + 1];
    }
    summary["empirical"] = emp;
    summary["tv"] = empirical.total_variation(analytic);
    summary["tv_defined"] = true;
  }
  summary["outcome_order"] = "q0+,q0-,q1+,q1-,...";
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_estimate(const RunConfig& config, std::ostream& out, const std::string& trials_csv) {
  if (config.scene.brightness != 0.5) {
    throw ConfigError("estimate assumes equal brightness (scene.brightness = 0.5)");
  }
  const auto ec = make_estimation_config(config);
  ExperimentOptions opts;
  opts.mle.theta_max = config.estimate.theta_max;
  opts.mle.grid_points = config.estimate.grid_points;
  opts.sampling = parse_sampling(config.estimate.sampling);
  opts.threads = config.threads;
  const double theta = config.scene.theta * ec.aperture.sigma();
  const auto report = crb_experiment(ec, theta, static_cast<std::uint64_t>(config.estimate.photons),
                                     static_cast<std::size_t>(config.estimate.trials),
                                     config.seed, opts);
  const std::string json = report_json(report) + "\n";
  if (config.output.path.empty()) {
    out << json;
  } else {
    write_atomic(config.output.path, json);
  }
  if (!trials_csv.empty()) {
    std::ostringstream csv;
    write_trials_csv(csv, report);
    write_atomic(trials_csv, csv.str());
  }
  return kExitOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, const ValidationOptions& options) {
  const auto checks = run_validation(config, options);
  bool ok = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << c.name << " max_dev=" << std::scientific
        << std::setprecision(3) << c.max_deviation << " tol=" << c.tolerance << std::defaultfloat << '\n';
    ok = ok && c.passed;
  }
  out << (ok ? "all checks passed" : "validation failed") << '\n';
  return ok ? kExitOk : kExitNumerical;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qlbi: entanglement-assisted two-telescope interferometry toolkit"};
  app.require_subcommand(1);

  struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    bool print_config = false;
  };
  struct Overrides {
    std::optional<double> theta_min, theta_max, r_min, r_max, theta, r;
    std::optional<int> theta_steps, r_steps, M, K;
    std::optional<std::vector<int>> modes;
    std::optional<std::int64_t> photons, trials;
    std::optional<std::string> mode, basis, measurement;
  } ov;
  Common common;
  std::string trials_csv;
  std::string fault_name;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run config; flags override its values");
    sub->add_option("--seed", common.seed, "Root seed");
    sub->add_option("--out", common.out, "Output path");
    sub->add_option("--threads", common.threads, "Worker threads");
    sub->add_flag("--print-config", common.print_config, "Print the effective config and exit");
  };
  const auto add_model = [&](CLI::App* sub) {
    sub->add_option("--M", ov.M, "Temporal modes per block");
    sub->add_option("--K", ov.K, "Spatial modes");
    sub->add_option("--theta", ov.theta, "Half-separation theta in units of sigma");
    sub->add_option("--r", ov.r, "Baseline ratio r = 2 beta / delta");
    sub->add_option("--basis", ov.basis, "psf-adapted or gaussian-hg");
    sub->add_option("--measurement", ov.measurement, "parity or individual");
  };

  auto* chart = app.add_subcommand("chart", "CFI/QFI chart CSV");
  add_common(chart);
  chart->add_option("--theta-min", ov.theta_min, "Smallest theta/sigma");
  chart->add_option("--theta-max", ov.theta_max, "Largest theta/sigma");
  chart->add_option("--theta-steps", ov.theta_steps, "Number of theta values");
  chart->add_option("--r-min", ov.r_min, "Smallest r");
  chart->add_option("--r-max", ov.r_max, "Largest r");
  chart->add_option("--r-steps", ov.r_steps, "Number of r values");
  chart->add_option("--modes", ov.modes, "Mode counts K[,K...]")->delimiter(',');
  chart->add_option("--basis", ov.basis, "psf-adapted or gaussian-hg");

  auto* simulate = app.add_subcommand("simulate", "Run the protocol and compare with the analytic law");
  add_common(simulate);
  add_model(simulate);
  simulate->add_option("--photons", ov.photons, "Number of detected photons");
  simulate->add_option("--mode", ov.mode, "fast (analytic sampling) or full (qubit-level)");

  auto* estimate = app.add_subcommand("estimate", "Maximum-likelihood separation estimates vs the Cramer-Rao bound");
  add_common(estimate);
  add_model(estimate);
  estimate->add_option("--photons", ov.photons, "Photons per trial");
  estimate->add_option("--trials", ov.trials, "Number of trials");
  estimate->add_option("--mode", ov.mode, "Photon sampling: fast or full");
  estimate->add_option("--trials-csv", trials_csv, "Write per-trial estimates here");

  auto* validate = app.add_subcommand("validate", "Oracle checks of the protocol and gadgets");
  add_common(validate);
  validate->add_option("--inject-fault", fault_name, "Deliberately break a stage (f-sign)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
    if (common.seed) config.seed = *common.seed;
    if (common.out) config.output.path = *common.out;
    if (common.threads) config.threads = *common.threads;
    if (ov.theta_min) config.chart.theta.min = *ov.theta_min;
    if (ov.theta_max) config.chart.theta.max = *ov.theta_max;
    if (ov.theta_steps) config.chart.theta.steps = *ov.theta_steps;
    if (ov.r_min) config.chart.r.min = *ov.r_min;
    if (ov.r_max) config.chart.r.max = *ov.r_max;
    if (ov.r_steps) config.chart.r.steps = *ov.r_steps;
    if (ov.modes) config.chart.modes = *ov.modes;
    if (ov.M) config.protocol.M = *ov.M;
    if (ov.K) config.basis.K = *ov.K;
    if (ov.theta) config.scene.theta = *ov.theta;
    if (ov.r) config.aperture.r = *ov.r;
    if (ov.basis) config.basis.kind = *ov.basis;
    if (ov.measurement) config.protocol.measurement = *ov.measurement;
    if (simulate->parsed()) {
      if (ov.photons) config.simulate.photons = *ov.photons;
      if (ov.mode) config.simulate.mode = *ov.mode;
    }
    if (estimate->parsed()) {
      if (ov.photons) config.estimate.photons = *ov.photons;
      if (ov.trials) config.estimate.trials = *ov.trials;
      if (ov.mode) config.estimate.sampling = *ov.mode;
    }
    validate_config(config);
    if (common.print_config) {
      out << emit_config(config);
      return kExitOk;
    }
    if (chart->parsed()) return cmd_chart(config, out);
    if (simulate->parsed()) return cmd_simulate(config, out);
    if (estimate->parsed()) return cmd_estimate(config, out, trials_csv);
    ValidationOptions vopts;
    if (!fault_name.empty()) {
      if (fault_name != "f-sign") throw ConfigError("unknown fault '" + fault_name + "'");
      vopts.fault_skip_f_correction = true;
    }
    return cmd_validate(config, out, vopts);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace qlbi::cli
