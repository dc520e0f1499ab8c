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

#include "qlbi/protocol.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "qlbi/error.h"
#include "qlbi/rng.h"

namespace qlbi {
namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

struct Measured {
  int outcome;
  double probability;
  SparseState state;
};

/// X measurement followed by a local reset of the measured qubit to |0>.
std::vector<Measured> measure_and_reset_x(const SparseState& state, std::size_t qubit) {
  std::vector<Measured> out;
  for (auto& b : measure_qubit_x(state, qubit)) {
    const int outcome = b.outcomes.front().eigenvalue;
    auto s = apply_gate(b.state, Gate::h(qubit));
    if (outcome < 0) s = apply_gate(s, Gate::x(qubit));
    if (!s.qubit_is_zero(qubit)) throw Error(ErrorKind::kInternal, "reset after X measurement failed");
    out.push_back({outcome, b.probability, std::move(s)});
  }
  return out;
}

const Measured& pick(const std::vector<Measured>& branches, Rng& rng) {
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (const auto& b : branches) {
    acc += b.probability;
    if (u < acc) return b;
  }
  return branches.back();
}

template <class T>
const T& pick_weighted(const std::vector<T>& branches, Rng& rng) {
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (const auto& b : branches) {
    acc += b.probability;
    if (u < acc) return b;
  }
  return branches.back();
}

struct SupportPair {
  int j;
  int i;
};

std::vector<SupportPair> photonic_support(const SparseState& state, const RegisterLayout& layout) {
  std::vector<SupportPair> pairs;
  for (int j = 1; j <= layout.temporal_modes(); ++j) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      if (!state.qubit_is_zero(layout.photonic(Site::kA, j, i)) ||
          !state.qubit_is_zero(layout.photonic(Site::kB, j, i))) {
        pairs.push_back({j, i});
      }
    }
  }
  return pairs;
}

bool ancillas_zero(const SparseState& state, const RegisterLayout& layout) {
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      if (!state.qubit_is_zero(layout.ancilla(Site::kA, k, i)) ||
          !state.qubit_is_zero(layout.ancilla(Site::kB, k, i))) {
        return false;
      }
    }
  }
  return true;
}

SparseState prepare_pair(const SparseState& state, const RegisterLayout& layout, int k, int i) {
  const auto c = layout.ancilla(Site::kA, k, i);
  const auto d = layout.ancilla(Site::kB, k, i);
  return apply_gate(apply_gate(state, Gate::h(c)), Gate::cnot(c, d));
}

SparseState cz_pair(const SparseState& state, const RegisterLayout& layout, int k, int i) {
  auto s = apply_gate(state, Gate::cz(layout.memory(Site::kA, k, i), layout.ancilla(Site::kA, k, i)));
  return apply_gate(s, Gate::cz(layout.memory(Site::kB, k, i), layout.ancilla(Site::kB, k, i)));
}

/// X-parity of ancilla pair (k, i), then release of both ancillas.
/// Returns (parity, probability, state) branches.
std::vector<Measured> read_pair(const SparseState& state, const RegisterLayout& layout, int k, int i,
                                MeasurementMode mode) {
  const std::size_t c = layout.ancilla(Site::kA, k, i);
  const std::size_t d = layout.ancilla(Site::kB, k, i);
  const std::array<std::size_t, 2> pair{c, d};
  std::vector<Measured> out;
  if (mode == MeasurementMode::kParity) {
    for (auto& b : measure_pauli_string(state, x_string(pair))) {
      out.push_back({b.outcomes.front().eigenvalue, b.probability, release_qubits(b.state, pair)});
    }
    return out;
  }
  for (auto& bc : measure_and_reset_x(state, c)) {
    for (auto& bd : measure_and_reset_x(bc.state, d)) {
      out.push_back({bc.outcome * bd.outcome, bc.probability * bd.probability, std::move(bd.state)});
    }
  }
  // Merge branches with equal parity: the individual outcomes carry no
  // further information once both qubits are reset.
  std::vector<Measured> merged;
  for (auto& b : out) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const Measured& m) { return m.outcome == b.outcome; });
    if (it == merged.end()) {
      merged.push_back(std::move(b));
    } else {
      if (max_abs_diff(it->state, b.state) > 1e-12) {
        throw Error(ErrorKind::kInternal, "ancilla outcomes of equal parity left different memory states");
      }
      it->probability += b.probability;
    }
  }
  return merged;
}

FlipPattern finish_pattern(std::vector<std::pair<int, int>> flipped, double probability, SparseState state,
                           const RegisterLayout& layout, bool allow_empty) {
  FlipPattern p;
  p.probability = probability;
  if (flipped.empty()) {
    if (!allow_empty) throw Error(ErrorKind::kDecodeIntegrity, "no flipped Bell pair after a heralded photon");
    p.state = std::move(state);
    return p;
  }
  const int q = flipped.front().second;
  for (const auto& [k, i] : flipped) {
    if (i != q) {
      throw Error(ErrorKind::kDecodeIntegrity, "Bell flips in two spatial modes (" + std::to_string(q) + " and " +
                                                   std::to_string(i) + ")");
    }
    p.flipped_bits.push_back(k);
    p.m |= 1 << (k - 1);
  }
  p.q = q;
  if (p.m < 1 || p.m > layout.temporal_modes()) {
    throw Error(ErrorKind::kDecodeIntegrity, "decoded temporal mode " + std::to_string(p.m) + " outside 1.." +
                                                 std::to_string(layout.temporal_modes()));
  }
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      const bool expect_live = (i == q) && ((p.m >> (k - 1)) & 1);
      if (!expect_live && (!state.qubit_is_zero(layout.memory(Site::kA, k, i)) ||
                           !state.qubit_is_zero(layout.memory(Site::kB, k, i)))) {
        throw Error(ErrorKind::kDecodeIntegrity, "memory excitation outside the decoded (m, q)");
      }
    }
  }
  p.state = std::move(state);
  return p;
}

struct PairIndex {
  int k;
  int i;
};

std::vector<PairIndex> all_pairs(const RegisterLayout& layout) {
  std::vector<PairIndex> pairs;
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    for (int i = 0; i < layout.spatial_modes(); ++i) pairs.push_back({k, i});
  }
  return pairs;
}

/// Shared driver for batch (already prepared) or streamed (prepare + CZ per
/// pair) decoding. `visit` receives every leaf.
void walk_pairs(const SparseState& state, const RegisterLayout& layout, MeasurementMode mode, bool streamed,
                Rng* rng, const std::function<void(std::vector<std::pair<int, int>>, double, SparseState)>& visit,
                const std::function<void(const SparseState&, int)>& observe = {}) {
  const auto pairs = all_pairs(layout);
  std::function<void(std::size_t, std::vector<std::pair<int, int>>, double, SparseState)> step =
      [&](std::size_t idx, std::vector<std::pair<int, int>> flipped, double prob, SparseState s) {
        if (idx == pairs.size()) {
          visit(std::move(flipped), prob, std::move(s));
          return;
        }
        const auto [k, i] = pairs[idx];
        if (streamed) {
          s = cz_pair(prepare_pair(s, layout, k, i), layout, k, i);
          if (observe) observe(s, 1);
        }
        auto branches = read_pair(s, layout, k, i, mode);
        if (rng != nullptr) {
          const auto& b = pick(branches, *rng);
          auto f = flipped;
          if (b.outcome < 0) f.emplace_back(k, i);
          step(idx + 1, std::move(f), prob * b.probability, b.state);
          return;
        }
        for (auto& b : branches) {
          auto f = flipped;
          if (b.outcome < 0) f.emplace_back(k, i);
          step(idx + 1, std::move(f), prob * b.probability, std::move(b.state));
        }
      };
  step(0, {}, 1.0, state);
}

void walk_photons(const SparseState& state, const RegisterLayout& layout, Rng* rng,
                  const std::function<void(PhotonMeasurement&&)>& visit) {
  const auto support = photonic_support(state, layout);
  std::vector<std::size_t> qubits;
  for (const auto& p : support) {
    qubits.push_back(layout.photonic(Site::kA, p.j, p.i));
    qubits.push_back(layout.photonic(Site::kB, p.j, p.i));
  }
  std::function<void(std::size_t, std::vector<int>, double, SparseState)> step =
      [&](std::size_t idx, std::vector<int> outcomes, double prob, SparseState s) {
        if (idx == qubits.size()) {
          PhotonMeasurement pm;
          for (std::size_t n = 0; n < support.size(); ++n) {
            pm.table.pairs.push_back({support[n].j, support[n].i, outcomes[2 * n], outcomes[2 * n + 1]});
          }
          pm.probability = prob;
          pm.state = std::move(s);
          visit(std::move(pm));
          return;
        }
        auto branches = measure_and_reset_x(s, qubits[idx]);
        if (rng != nullptr) {
          const auto& b = pick(branches, *rng);
          auto o = outcomes;
          o.push_back(b.outcome);
          step(idx + 1, std::move(o), prob * b.probability, b.state);
          return;
        }
        for (auto& b : branches) {
          auto o = outcomes;
          o.push_back(b.outcome);
          step(idx + 1, std::move(o), prob * b.probability, std::move(b.state));
        }
      };
  step(0, {}, 1.0, state);
}

}  // namespace

const XResultTable::PairResult* XResultTable::find(int m, int q) const {
  for (const auto& p : pairs) {
    if (p.m == m && p.q == q) return &p;
  }
  return nullptr;
}

int f_sign(const XResultTable& table, int m, int q) {
  const auto* p = table.find(m, q);
  if (p == nullptr) {
    throw Error(ErrorKind::kInvalidArgument,
                "no stored X result for (m=" + std::to_string(m) + ", q=" + std::to_string(q) + ")");
  }
  return p->a == p->b ? 1 : -1;
}

int zeta_decision(int odd_parity_pairs) { return odd_parity_pairs % 2 == 0 ? 1 : -1; }

SparseState inject_photon(const RegisterLayout& layout, const ApertureConfig& aperture, std::span<const double> eta,
                          double xs, int m) {
  if (eta.size() != static_cast<std::size_t>(layout.spatial_modes())) {
    throw Error(ErrorKind::kLengthMismatch, "eta has " + std::to_string(eta.size()) + " entries, layout has K=" +
                                                std::to_string(layout.spatial_modes()));
  }
  if (m < 1 || m > layout.temporal_modes()) {
    throw Error(ErrorKind::kInvalidArgument, "temporal mode m=" + std::to_string(m) + " outside 1..M");
  }
  const double phase = aperture.beta() * xs;
  std::vector<SparseState::Entry> entries;
  for (int q = 0; q < layout.spatial_modes(); ++q) {
    BasisKey a;
    a.flip(layout.photonic(Site::kA, m, q));
    BasisKey b;
    b.flip(layout.photonic(Site::kB, m, q));
    entries.push_back({a, kInvSqrt2 * eta[q] * std::polar(1.0, -phase)});
    entries.push_back({b, kInvSqrt2 * eta[q] * std::polar(1.0, phase)});
  }
  return SparseState::from_entries(layout.num_qubits(), std::move(entries));
}

SparseState encode(const SparseState& state, const RegisterLayout& layout) {
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      if (!state.qubit_is_zero(layout.memory(Site::kA, k, i)) ||
          !state.qubit_is_zero(layout.memory(Site::kB, k, i))) {
        throw Error(ErrorKind::kPrecondition, "memory qubits must start in |0> before encoding");
      }
    }
  }
  SparseState s = state;
  for (Site site : {Site::kA, Site::kB}) {
    for (int i = 0; i < layout.spatial_modes(); ++i) {
      for (int j = 1; j <= layout.temporal_modes(); ++j) {
        const auto photon = layout.photonic(site, j, i);
        if (s.qubit_is_zero(photon)) continue;  // CNOT with a |0> control is the identity
        for (int k = 1; k <= layout.memory_bits(); ++k) {
          if ((j >> (k - 1)) & 1) s = apply_gate(s, Gate::cnot(photon, layout.memory(site, k, i)));
        }
      }
    }
  }
  return s;
}

std::vector<PhotonMeasurement> measure_photons(const SparseState& state, const RegisterLayout& layout) {
  std::vector<PhotonMeasurement> out;
  walk_photons(state, layout, nullptr, [&](PhotonMeasurement&& pm) { out.push_back(std::move(pm)); });
  return out;
}

PhotonMeasurement measure_photons(const SparseState& state, const RegisterLayout& layout, Rng& rng) {
  PhotonMeasurement out;
  walk_photons(state, layout, &rng, [&](PhotonMeasurement&& pm) { out = std::move(pm); });
  return out;
}

SparseState prepare_bell_ancillas(const SparseState& state, const RegisterLayout& layout) {
  if (!ancillas_zero(state, layout)) {
    throw Error(ErrorKind::kPrecondition, "Bell ancillas must start in |0>");
  }
  SparseState s = state;
  for (const auto& [k, i] : all_pairs(layout)) s = prepare_pair(s, layout, k, i);
  return s;
}

SparseState decode_cz(const SparseState& state, const RegisterLayout& layout) {
  SparseState s = state;
  for (const auto& [k, i] : all_pairs(layout)) s = cz_pair(s, layout, k, i);
  return s;
}

std::vector<FlipPattern> read_flip_pattern(const SparseState& state, const RegisterLayout& layout,
                                           MeasurementMode mode) {
  std::vector<FlipPattern> out;
  walk_pairs(state, layout, mode, false, nullptr, [&](auto flipped, double p, SparseState s) {
    out.push_back(finish_pattern(std::move(flipped), p, std::move(s), layout, false));
  });
  return out;
}

FlipPattern read_flip_pattern(const SparseState& state, const RegisterLayout& layout, MeasurementMode mode,
                              Rng& rng) {
  FlipPattern out;
  walk_pairs(state, layout, mode, false, &rng, [&](auto flipped, double p, SparseState s) {
    out = finish_pattern(std::move(flipped), p, std::move(s), layout, false);
  });
  return out;
}

std::vector<ZetaOutcome> zeta_measure(const SparseState& state, const RegisterLayout& layout, int m, int q, int f,
                                      MeasurementMode mode) {
  if (f != 1 && f != -1) throw Error(ErrorKind::kInvalidArgument, "f must be +1 or -1");
  if (m < 1 || m > layout.temporal_modes() || q < 0 || q >= layout.spatial_modes()) {
    throw Error(ErrorKind::kPrecondition, "zeta readout needs a decoded (m, q)");
  }
  std::vector<std::size_t> e_reg;
  std::vector<std::size_t> f_reg;
  for (int k = 1; k <= layout.memory_bits(); ++k) {
    if ((m >> (k - 1)) & 1) {
      e_reg.push_back(layout.memory(Site::kA, k, q));
      f_reg.push_back(layout.memory(Site::kB, k, q));
    }
  }
  // Support must lie in span{|0..0,1..1>, |1..1,0..0>} on (E, F).
  for (const auto& entry : state.entries()) {
    const bool e0 = entry.key.test(e_reg.front());
    for (std::size_t n = 0; n < e_reg.size(); ++n) {
      if (entry.key.test(e_reg[n]) != e0 || entry.key.test(f_reg[n]) == e0) {
        throw Error(ErrorKind::kPrecondition, "E/F registers are not in the one-excitation logical subspace");
      }
    }
  }
  std::vector<std::size_t> all = e_reg;
  all.insert(all.end(), f_reg.begin(), f_reg.end());

  auto finish = [&](int zeta, double p, const SparseState& s) {
    ZetaOutcome z;
    z.zeta = zeta;
    z.sign = (f < 0) ? -zeta : zeta;
    z.probability = p;
    z.state = release_qubits(s, all);
    return z;
  };

  std::vector<ZetaOutcome> out;
  if (mode == MeasurementMode::kParity) {
    for (auto& b : measure_pauli_string(state, x_string(all))) {
      out.push_back(finish(b.outcomes.front().eigenvalue, b.probability, b.state));
    }
    return out;
  }
  // Individual X on every qubit; the decision uses the count of odd pairs.
  std::function<void(std::size_t, std::vector<int>, double, SparseState)> step =
      [&](std::size_t idx, std::vector<int> outcomes, double p, SparseState s) {
        if (idx == all.size()) {
          int odd = 0;
          for (std::size_t n = 0; n < e_reg.size(); ++n) {
            if (outcomes[n] != outcomes[n + e_reg.size()]) ++odd;
          }
          out.push_back(finish(zeta_decision(odd), p, s));
          return;
        }
        for (auto& b : measure_qubit_x(s, all[idx])) {
          auto o = outcomes;
          o.push_back(b.outcomes.front().eigenvalue);
          step(idx + 1, std::move(o), p * b.probability, std::move(b.state));
        }
      };
  step(0, {}, 1.0, state);
  return out;
}

Protocol::Protocol(ProtocolConfig config)
    : config_(std::move(config)),
      layout_(config_.M, static_cast<int>(config_.basis.size())),
      overlaps_(overlaps(config_.basis, config_.scene)) {
  if (!(config_.epsilon > 0.0 && config_.epsilon <= 0.1)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must lie in (0, 0.1]");
  }
  if (!config_.conditional && config_.M * config_.epsilon > 0.5) {
    throw Error(ErrorKind::kInvalidArgument, "unconditional blocks need M*epsilon <= 0.5");
  }
}

SparseState Protocol::inject_photon(std::size_t source, int m) const {
  if (source >= config_.scene.size()) throw Error(ErrorKind::kInvalidArgument, "source index out of range");
  return qlbi::inject_photon(layout_, config_.aperture, overlaps_.eta[source], config_.scene[source].x, m);
}

void Protocol::check_sparsity(const SparseState& state, int live_hadamards) const {
  const std::size_t bound = (2 * modes()) << live_hadamards;
  if (state.size() > bound) {
    throw Error(ErrorKind::kInternal, "state has " + std::to_string(state.size()) + " entries, bound is " +
                                          std::to_string(bound));
  }
}

PhotonRecord Protocol::run_injected(std::size_t source, int m, Rng& rng) const {
  PhotonRecord rec;
  rec.source = source;
  auto s = inject_photon(source, m);
  rec.counts.inject = s.size();
  check_sparsity(s, 0);
  s = encode(s, layout_);
  rec.counts.encode = s.size();
  check_sparsity(s, 0);
  auto pm = measure_photons(s, layout_, rng);
  rec.counts.measure = pm.state.size();
  check_sparsity(pm.state, 0);

  // Bell pairs are prepared, entangled with the memories and read one at a
  // time; the operations on distinct pairs commute with the batch order.
  std::size_t ebits = 0;
  std::size_t peak = 0;
  FlipPattern fp;
  walk_pairs(
      pm.state, layout_, config_.measurement, true, &rng,
      [&](auto flipped, double p, SparseState st) {
        fp = finish_pattern(std::move(flipped), p, std::move(st), layout_, false);
      },
      [&](const SparseState& st, int live) {
        ++ebits;
        peak = std::max(peak, st.size());
        check_sparsity(st, live);
      });
  rec.counts.prepare = peak;
  rec.counts.decode = peak;
  rec.counts.flip = fp.state.size();
  if (ebits != ebits_per_run()) {
    throw Error(ErrorKind::kInternal, "ebit ledger mismatch: consumed " + std::to_string(ebits) + ", expected " +
                                          std::to_string(ebits_per_run()));
  }
  rec.ebits = ebits;
  if (fp.m != m) {
    throw Error(ErrorKind::kDecodeIntegrity,
                "decoded m=" + std::to_string(fp.m) + " but the photon arrived in m=" + std::to_string(m));
  }
  rec.m = fp.m;
  rec.q = fp.q;
  rec.flipped_pairs = fp.flipped_count();
  rec.f = f_sign(pm.table, fp.m, fp.q);
  const int f_applied = config_.fault_skip_f_correction ? 1 : rec.f;
  auto zetas = zeta_measure(fp.state, layout_, fp.m, fp.q, f_applied, config_.measurement);
  const auto& z = pick_weighted(zetas, rng);
  rec.zeta = z.zeta;
  rec.sign = z.sign;
  rec.counts.zeta = z.state.size();
  return rec;
}

PhotonRecord Protocol::run_once(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t source = config_.scene.size() - 1;
  for (std::size_t s = 0; s < config_.scene.size(); ++s) {
    acc += config_.scene[s].brightness;
    if (u < acc) {
      source = s;
      break;
    }
  }
  const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config_.M)));
  return run_injected(source, m, rng);
}

std::optional<PhotonRecord> Protocol::run_block(Rng& rng) const {
  if (!config_.conditional && rng.uniform() >= config_.M * config_.epsilon) {
    // Vacuum block: every Bell pair reads even, so nothing is heralded.
    SparseState vacuum(layout_.num_qubits());
    bool heralded = false;
    walk_pairs(vacuum, layout_, config_.measurement, true, &rng, [&](auto flipped, double, SparseState) {
      heralded = !flipped.empty();
    });
    if (heralded) throw Error(ErrorKind::kDecodeIntegrity, "vacuum block heralded a photon");
    return std::nullopt;
  }
  return run_once(rng);
}

std::vector<ProtocolLeaf> Protocol::enumerate_leaves(std::size_t source, int m, std::size_t cap) const {
  std::vector<ProtocolLeaf> leaves;
  auto s = encode(inject_photon(source, m), layout_);
  for (auto& pm : measure_photons(s, layout_)) {
    walk_pairs(pm.state, layout_, config_.measurement, true, nullptr, [&](auto flipped, double p, SparseState st) {
      auto fp = finish_pattern(std::move(flipped), p, std::move(st), layout_, false);
      if (fp.m != m) throw Error(ErrorKind::kDecodeIntegrity, "decoded temporal mode differs from injected");
      const int f = f_sign(pm.table, fp.m, fp.q);
      const int f_applied = config_.fault_skip_f_correction ? 1 : f;
      for (auto& z : zeta_measure(fp.state, layout_, fp.m, fp.q, f_applied, config_.measurement)) {
        if (leaves.size() >= cap) {
          throw Error(ErrorKind::kEnumerationOverflow, "protocol enumeration exceeds " + std::to_string(cap) +
                                                           " branches");
        }
        leaves.push_back({fp.m, fp.q, f, z.zeta, z.sign, fp.flipped_count(),
                          pm.probability * fp.probability * z.probability});
      }
    });
  }
  return leaves;
}

OutcomeDistribution Protocol::enumerate(std::size_t source, int m) const {
  OutcomeDistribution dist(modes());
  for (const auto& leaf : enumerate_leaves(source, m)) dist.at(leaf.q, leaf.sign) += leaf.probability;
  return dist;
}

OutcomeDistribution Protocol::enumerate_scene() const {
  OutcomeDistribution dist(modes());
  for (std::size_t s = 0; s < config_.scene.size(); ++s) {
    for (int m = 1; m <= config_.M; ++m) {
      const auto part = enumerate(s, m);
      const double w = config_.scene[s].brightness / config_.M;
      for (std::size_t q = 0; q < modes(); ++q) {
        dist.plus[q] += w * part.plus[q];
        dist.minus[q] += w * part.minus[q];
      }
    }
  }
  return dist;
}

}  // namespace qlbi
