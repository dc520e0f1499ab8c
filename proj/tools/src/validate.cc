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

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "qlbi/cli/commands.h"
#include "qlbi/fisher.h"
#include "qlbi/gadgets.h"
#include "qlbi/protocol.h"
#include "qlbi/rng.h"

namespace qlbi::cli {
namespace {

struct Tracker {
  ValidationCheck check;

  Tracker(std::string name, double tolerance) { check = {std::move(name), 0.0, tolerance, true}; }
  void observe(double deviation) {
    if (!(deviation <= check.max_deviation)) check.max_deviation = std::isfinite(deviation) ? deviation : INFINITY;
  }
  void fail() { check.max_deviation = INFINITY; }
  ValidationCheck done() {
    check.passed = check.max_deviation <= check.tolerance;
    return check;
  }
};

cdouble random_amplitude(Rng& rng) { return {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0}; }

SparseState two_qubit_state(std::size_t n, std::size_t q0, std::size_t q1, const std::array<cdouble, 4>& amps) {
  std::vector<SparseState::Entry> entries;
  for (int v = 0; v < 4; ++v) {
    BasisKey key;
    key.set(q0, v & 1);
    key.set(q1, (v >> 1) & 1);
    entries.push_back({key, amps[v]});
  }
  return SparseState::from_entries(n, std::move(entries));
}

ValidationCheck check_enumerate(const RunConfig& config, const ValidationOptions& options) {
  Tracker t("enumerate-vs-analytic", 1e-10);
  Rng rng(derive_seed(config.seed, "validate.theta"));
  std::vector<double> thetas;
  for (int i = 0; i < 5; ++i) thetas.push_back(0.5 * (1.0 - rng.uniform()));
  const auto kind = parse_basis_kind(config.basis.kind);
  for (double r : {0.5, 2.0}) {
    const auto aperture = ApertureConfig::from_ratio(config.aperture.delta, r);
    const auto basis3 = build_basis(aperture, 3, kind);
    for (int M : {1, 3, 7}) {
      for (std::size_t K : {1, 2, 3}) {
        for (double theta : thetas) {
          ProtocolConfig pc;
          pc.aperture = aperture;
          pc.basis = basis3.truncated(K);
          pc.scene = Scene::two_point(theta * aperture.sigma());
          pc.M = M;
          pc.fault_skip_f_correction = options.fault_skip_f_correction;
          const Protocol protocol(pc);
          t.observe(protocol.enumerate_scene().max_abs_diff(outcome_probs(aperture, pc.basis, pc.scene)));
        }
      }
    }
  }
  return t.done();
}

ValidationCheck check_individual(const RunConfig& config, const ValidationOptions& options) {
  Tracker t("individual-readout", 1e-10);
  const auto aperture = ApertureConfig::from_ratio(config.aperture.delta, 1.0);
  ProtocolConfig pc;
  pc.aperture = aperture;
  pc.basis = build_basis(aperture, 2, parse_basis_kind(config.basis.kind));
  pc.scene = Scene::two_point(0.15 * aperture.sigma());
  pc.M = 3;
  pc.measurement = MeasurementMode::kIndividual;
  pc.fault_skip_f_correction = options.fault_skip_f_correction;
  const Protocol protocol(pc);
  t.observe(protocol.enumerate_scene().max_abs_diff(outcome_probs(aperture, pc.basis, pc.scene)));
  return t.done();
}

ValidationCheck check_pairwise(const RunConfig& config, const ValidationOptions& options) {
  Tracker t("pairwise-cos2-law", 1e-10);
  const auto aperture = ApertureConfig::from_ratio(config.aperture.delta, 2.0);
  for (double phase : {0.0, std::numbers::pi / 3.0, std::numbers::pi / 2.0}) {
    ProtocolConfig pc;
    pc.aperture = aperture;
    pc.basis = build_basis(aperture, 1, BasisKind::kPsfAdapted);
    pc.scene = Scene::single(phase / aperture.beta());
    pc.M = 1;
    pc.fault_skip_f_correction = options.fault_skip_f_correction;
    const auto d = Protocol(pc).enumerate(0, 1);
    const double c2 = std::cos(phase) * std::cos(phase);
    t.observe(std::abs(d.plus[0] - c2));
    t.observe(std::abs(d.minus[0] - (1.0 - c2)));
  }
  return t.done();
}

ValidationCheck check_bell_identities() {
  Tracker t("cz-bell-identities", 1e-12);
  const RegisterLayout layout(7, 3);
  const std::size_t n = layout.num_qubits();
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      for (int pattern : {0b00, 0b01, 0b10}) {
        BasisKey key;
        if (pattern & 0b10) key.set(layout.memory(Site::kA, k, i), true);
        if (pattern & 0b01) key.set(layout.memory(Site::kB, k, i), true);
        const auto memory = SparseState::from_entries(n, {{key, 1.0}});
        const auto fresh = prepare_bell_ancillas(memory, layout);
        const auto got = decode_cz(fresh, layout);
        auto expected = fresh;
        if (pattern != 0) expected = apply_gate(fresh, Gate::z(layout.ancilla(Site::kA, k, i)));
        t.observe(max_abs_diff(got, expected));
      }
    }
  }
  return t.done();
}

ValidationCheck check_decode() {
  Tracker t("decode-exhaustive", 0.0);
  const RegisterLayout layout(7, 3);
  const auto aperture = ApertureConfig::from_ratio(2.0 * std::numbers::pi, 1.0);
  for (int m = 1; m <= 7; ++m) {
    for (int q = 0; q < 3; ++q) {
      std::vector<double> eta(3, 0.0);
      eta[q] = 1.0;
      const auto s = encode(inject_photon(layout, aperture, eta, 0.1, m), layout);
      for (const auto& pm : measure_photons(s, layout)) {
        const auto decoded = decode_cz(prepare_bell_ancillas(pm.state, layout), layout);
        for (const auto& fp : read_flip_pattern(decoded, layout)) {
          if (fp.m != m || fp.q != q || fp.flipped_count() != std::popcount(static_cast<unsigned>(m))) t.fail();
        }
      }
    }
  }
  return t.done();
}

ValidationCheck check_beamsplitter(Rng& rng) {
  Tracker t("beamsplitter-map", 1e-12);
  const double s = 1.0 / std::sqrt(2.0);
  for (int trial = 0; trial < 100; ++trial) {
    cdouble a = random_amplitude(rng);
    cdouble b = random_amplitude(rng);
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    a /= norm;
    b /= norm;
    // qubit 0 = E, qubit 1 = F; |10> has E excited.
    const auto in = two_qubit_state(2, 0, 1, {0.0, a, b, 0.0});
    const auto out = logical_beamsplitter(in, 0, 1);
    t.observe(max_abs_diff(out, two_qubit_state(2, 0, 1, {0.0, s * (a + b), s * (a - b), 0.0})));
    t.observe(max_abs_diff(logical_beamsplitter(out, 0, 1), in));
  }
  return t.done();
}

ValidationCheck check_teleported_cnot(Rng& rng) {
  Tracker t("teleported-cnot", 1e-12);
  const TeleportedCnot plan{{0, 0}, {1, 1}, {2, 0}, {3, 1}};
  for (int trial = 0; trial < 50; ++trial) {
    std::array<cdouble, 4> amps;
    double norm = 0.0;
    for (auto& a : amps) {
      a = random_amplitude(rng);
      norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    const auto in = two_qubit_state(4, 0, 1, amps);
    const auto expected = apply_gate(in, Gate::cnot(0, 1));
    const std::array<Gate, 2> bell{Gate::h(2), Gate::cnot(2, 3)};
    double total = 0.0;
    for (const auto& br : teleported_cnot(apply_gates(in, bell), plan)) {
      t.observe(max_abs_diff(br.state, expected));
      total += br.probability;
    }
    t.observe(std::abs(total - 1.0));
  }
  return t.done();
}

ValidationCheck check_qfi() {
  Tracker t("qfi-closed-form", 1e-12);
  for (double r : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const auto aperture = ApertureConfig::from_ratio(2.0 * std::numbers::pi, r);
    const double sigma = aperture.sigma();
    const double want = 4.0 * std::numbers::pi * std::numbers::pi / (3.0 * sigma * sigma) * (3.0 * r * r + 1.0);
    t.observe(std::abs(qfi(aperture) - want) / want);
  }
  return t.done();
}

}  // namespace

std::vector<ValidationCheck> run_validation(const RunConfig& config, const ValidationOptions& options) {
  Rng rng(derive_seed(config.seed, "validate.gadgets"));
  std::vector<ValidationCheck> checks;
  checks.push_back(check_enumerate(config, options));
  checks.push_back(check_individual(config, options));
  checks.push_back(check_pairwise(config, options));
  checks.push_back(check_bell_identities());
  checks.push_back(check_decode());
  checks.push_back(check_beamsplitter(rng));
  checks.push_back(check_teleported_cnot(rng));
  checks.push_back(check_qfi());
  return checks;
}

}  // namespace qlbi::cli
