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

#include "qlbi/statevec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "json.hpp"
#include "qlbi/error.h"
#include "qlbi/rng.h"

namespace qlbi {
namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
constexpr double kDropBranch = 1e-24;

void check_qubit(const SparseState& state, std::size_t q, const char* what) {
  if (q == kNoQubit || q >= state.num_qubits()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " qubit " + std::to_string(q) + " outside register of " +
                    std::to_string(state.num_qubits()));
  }
}

}  // namespace

int BasisKey::popcount() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::string BasisKey::to_string(std::size_t num_qubits) const {
  std::string s(num_qubits, '0');
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if (test(q)) s[q] = '1';
  }
  return s;
}

BasisKey BasisKey::from_string(std::string_view bits) {
  if (bits.size() > kMaxQubits) throw Error(ErrorKind::kLengthMismatch, "bitstring longer than kMaxQubits");
  BasisKey key;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      key.flip(q);
    } else if (bits[q] != '0') {
      throw Error(ErrorKind::kInvalidArgument, "bitstring may only contain 0 and 1");
    }
  }
  return key;
}

SparseState::SparseState(std::size_t num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits > kMaxQubits) {
    throw Error(ErrorKind::kInvalidArgument, "register of " + std::to_string(num_qubits) + " qubits exceeds " +
                                                 std::to_string(kMaxQubits));
  }
  entries_.push_back({BasisKey{}, cdouble(1.0, 0.0)});
}

SparseState SparseState::from_entries(std::size_t num_qubits, std::vector<Entry> entries) {
  if (num_qubits > kMaxQubits) {
    throw Error(ErrorKind::kInvalidArgument, "register of " + std::to_string(num_qubits) + " qubits exceeds " +
                                                 std::to_string(kMaxQubits));
  }
  SparseState out;
  out.num_qubits_ = num_qubits;
  const auto by_key = [](const Entry& a, const Entry& b) { return a.key < b.key; };
  if (!std::is_sorted(entries.begin(), entries.end(), by_key)) std::sort(entries.begin(), entries.end(), by_key);
  out.entries_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    cdouble sum = entries[i].amp;
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].key == entries[i].key) sum += entries[j++].amp;
    if (std::norm(sum) >= kPruneThreshold * kPruneThreshold) out.entries_.push_back({entries[i].key, sum});
    i = j;
  }
  return out;
}

cdouble SparseState::amplitude(const BasisKey& key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, const BasisKey& k) { return e.key < k; });
  if (it != entries_.end() && it->key == key) return it->amp;
  return 0.0;
}

double SparseState::norm_squared() const {
  double s = 0.0;
  for (const auto& e : entries_) s += std::norm(e.amp);
  return s;
}

bool SparseState::qubit_is_zero(std::size_t q) const {
  return std::none_of(entries_.begin(), entries_.end(), [q](const Entry& e) { return e.key.test(q); });
}

SparseState SparseState::scaled(cdouble factor) const {
  SparseState out;
  out.num_qubits_ = num_qubits_;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    const cdouble a = e.amp * factor;
    if (std::norm(a) >= kPruneThreshold * kPruneThreshold) out.entries_.push_back({e.key, a});
  }
  return out;
}

SparseState init_basis_state(std::size_t num_qubits, std::string_view bits) {
  if (bits.size() != num_qubits) {
    throw Error(ErrorKind::kLengthMismatch, "bitstring has " + std::to_string(bits.size()) +
                                                " characters, register has " + std::to_string(num_qubits));
  }
  return SparseState::from_entries(num_qubits, {{BasisKey::from_string(bits), cdouble(1.0, 0.0)}});
}

SparseState apply_gate(const SparseState& state, const Gate& gate) {
  check_qubit(state, gate.target, "target");
  const bool two_qubit = gate.kind == GateKind::kCnot || gate.kind == GateKind::kCz;
  if (two_qubit) {
    check_qubit(state, gate.control, "control");
    if (gate.control == gate.target) {
      throw Error(ErrorKind::kInvalidArgument, "two-qubit gate on duplicate qubit " + std::to_string(gate.target));
    }
  }
  const std::size_t t = gate.target;
  const std::size_t c = gate.control;
  std::vector<SparseState::Entry> out;
  out.reserve(state.size() * (gate.kind == GateKind::kH ? 2 : 1));
  for (const auto& e : state.entries()) {
    switch (gate.kind) {
      case GateKind::kX: {
        auto k = e.key;
        k.flip(t);
        out.push_back({k, e.amp});
        break;
      }
      case GateKind::kZ:
        out.push_back({e.key, e.key.test(t) ? -e.amp : e.amp});
        break;
      case GateKind::kPhase:
        out.push_back({e.key, e.key.test(t) ? e.amp * std::polar(1.0, gate.angle) : e.amp});
        break;
      case GateKind::kH: {
        auto k0 = e.key;
        k0.set(t, false);
        auto k1 = e.key;
        k1.set(t, true);
        const double sign = e.key.test(t) ? -1.0 : 1.0;
        out.push_back({k0, kInvSqrt2 * e.amp});
        out.push_back({k1, sign * kInvSqrt2 * e.amp});
        break;
      }
      case GateKind::kCnot: {
        auto k = e.key;
        if (k.test(c)) k.flip(t);
        out.push_back({k, e.amp});
        break;
      }
      case GateKind::kCz:
        out.push_back({e.key, (e.key.test(c) && e.key.test(t)) ? -e.amp : e.amp});
        break;
    }
  }
  return SparseState::from_entries(state.num_qubits(), std::move(out));
}

SparseState apply_gates(SparseState state, std::span<const Gate> gates) {
  for (const auto& g : gates) state = apply_gate(state, g);
  return state;
}

PauliString x_string(std::span<const std::size_t> qubits) {
  PauliString s;
  for (auto q : qubits) s.push_back({q, Pauli::kX});
  return s;
}

std::vector<Branch> measure_pauli_string(const SparseState& state, const PauliString& observable) {
  if (observable.empty()) throw Error(ErrorKind::kInvalidArgument, "empty Pauli string");
  std::set<std::size_t> seen;
  for (const auto& term : observable) {
    check_qubit(state, term.qubit, "measured");
    if (!seen.insert(term.qubit).second) {
      throw Error(ErrorKind::kInvalidArgument, "Pauli string repeats qubit " + std::to_string(term.qubit));
    }
  }
  // P|b> = sign(b) |b'> with X flipping and Z signing.
  std::vector<SparseState::Entry> image;
  image.reserve(state.size());
  for (const auto& e : state.entries()) {
    auto k = e.key;
    double sign = 1.0;
    for (const auto& term : observable) {
      if (term.pauli == Pauli::kX) {
        k.flip(term.qubit);
      } else if (e.key.test(term.qubit)) {
        sign = -sign;
      }
    }
    image.push_back({k, sign * e.amp});
  }
  std::vector<Branch> branches;
  for (int eigen : {+1, -1}) {
    std::vector<SparseState::Entry> proj;
    proj.reserve(2 * state.size());
    for (const auto& e : state.entries()) proj.push_back({e.key, 0.5 * e.amp});
    for (const auto& e : image) proj.push_back({e.key, 0.5 * eigen * e.amp});
    auto projected = SparseState::from_entries(state.num_qubits(), std::move(proj));
    const double p = projected.norm_squared();
    if (p < kDropBranch) continue;
    Branch b;
    b.outcomes.push_back({observable, eigen});
    b.probability = p;
    b.state = projected.scaled(1.0 / std::sqrt(p));
    branches.push_back(std::move(b));
  }
  return branches;
}

std::vector<Branch> measure_qubit_x(const SparseState& state, std::size_t qubit) {
  return measure_pauli_string(state, {{qubit, Pauli::kX}});
}

std::vector<Branch> measure_qubit_z(const SparseState& state, std::size_t qubit) {
  return measure_pauli_string(state, {{qubit, Pauli::kZ}});
}

std::vector<Branch> enumerate_branches(const SparseState& state, const std::vector<PauliString>& plan,
                                       std::size_t cap) {
  std::vector<Branch> leaves;
  std::function<void(Branch&&, std::size_t)> expand = [&](Branch&& node, std::size_t depth) {
    if (depth == plan.size()) {
      if (leaves.size() >= cap) {
        throw Error(ErrorKind::kEnumerationOverflow, "more than " + std::to_string(cap) + " branches");
      }
      leaves.push_back(std::move(node));
      return;
    }
    for (auto& child : measure_pauli_string(node.state, plan[depth])) {
      Branch next;
      next.outcomes = node.outcomes;
      next.outcomes.push_back(std::move(child.outcomes.front()));
      next.probability = node.probability * child.probability;
      next.state = std::move(child.state);
      expand(std::move(next), depth + 1);
    }
  };
  Branch root;
  root.state = state;
  expand(std::move(root), 0);
  return leaves;
}

const Branch& sample_branch(const std::vector<Branch>& branches, Rng& rng) {
  if (branches.empty()) throw Error(ErrorKind::kInternal, "no branch to sample");
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

SparseState release_qubits(const SparseState& state, std::span<const std::size_t> qubits) {
  if (qubits.empty()) return state;
  if (qubits.size() > 20) throw Error(ErrorKind::kInvalidArgument, "too many qubits to release at once");
  for (auto q : qubits) check_qubit(state, q, "released");
  const std::size_t local_dim = std::size_t{1} << qubits.size();
  // Group amplitudes by the rest of the key; a product state gives every
  // group the same local vector up to a scalar.
  struct Group {
    BasisKey rest;
    std::vector<cdouble> local;
  };
  std::vector<Group> groups;
  for (const auto& e : state.entries()) {
    BasisKey rest = e.key;
    std::size_t idx = 0;
    for (std::size_t b = 0; b < qubits.size(); ++b) {
      if (rest.test(qubits[b])) idx |= std::size_t{1} << b;
      rest.set(qubits[b], false);
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.rest == rest; });
    if (it == groups.end()) {
      groups.push_back({rest, std::vector<cdouble>(local_dim, 0.0)});
      it = std::prev(groups.end());
    }
    it->local[idx] += e.amp;
  }
  std::vector<cdouble> chi = groups.front().local;
  double chi_norm = 0.0;
  for (auto v : chi) chi_norm += std::norm(v);
  chi_norm = std::sqrt(chi_norm);
  for (auto& v : chi) v /= chi_norm;

  std::vector<SparseState::Entry> out;
  for (const auto& g : groups) {
    cdouble coeff = 0.0;
    for (std::size_t i = 0; i < local_dim; ++i) coeff += std::conj(chi[i]) * g.local[i];
    double residual = 0.0;
    for (std::size_t i = 0; i < local_dim; ++i) residual += std::norm(g.local[i] - coeff * chi[i]);
    if (residual > 1e-20) {
      throw Error(ErrorKind::kPrecondition, "released qubits are entangled with the rest of the register");
    }
    out.push_back({g.rest, coeff});
  }
  return SparseState::from_entries(state.num_qubits(), std::move(out));
}

double max_abs_diff(const SparseState& a, const SparseState& b) {
  if (a.num_qubits() != b.num_qubits()) throw Error(ErrorKind::kLengthMismatch, "states on different registers");
  double worst = 0.0;
  for (const auto& e : a.entries()) worst = std::max(worst, std::abs(e.amp - b.amplitude(e.key)));
  for (const auto& e : b.entries()) worst = std::max(worst, std::abs(e.amp - a.amplitude(e.key)));
  return worst;
}

std::string to_json(const SparseState& state) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : state.entries()) {
    j.push_back({{"bitstring", e.key.to_string(state.num_qubits())}, {"re", e.amp.real()}, {"im", e.amp.imag()}});
  }
  return j.dump();
}

RegisterLayout::RegisterLayout(int M, int K) : M_(M), K_(K), Mbar_(0) {
  if (M < 1) throw Error(ErrorKind::kInvalidArgument, "temporal mode count M must be >= 1");
  if (K < 1) throw Error(ErrorKind::kInvalidArgument, "spatial mode count K must be >= 1");
  while ((1LL << Mbar_) < static_cast<long long>(M) + 1) ++Mbar_;
  if (num_qubits() > kMaxQubits) {
    throw Error(ErrorKind::kInvalidArgument, "layout needs " + std::to_string(num_qubits()) +
                                                 " qubits, engine supports " + std::to_string(kMaxQubits));
  }
}

void RegisterLayout::check(int k_or_j, int lo, int hi, int i, const char* what) const {
  if (k_or_j < lo || k_or_j > hi || i < 0 || i >= K_) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " index out of range");
  }
}

std::size_t RegisterLayout::photonic(Site site, int j, int i) const {
  check(j, 1, M_, i, "photonic");
  return static_cast<std::size_t>(site) * photonic_count() + static_cast<std::size_t>(j - 1) * K_ + i;
}

std::size_t RegisterLayout::memory(Site site, int k, int i) const {
  check(k, 1, Mbar_, i, "memory");
  return 2 * photonic_count() + static_cast<std::size_t>(site) * memory_count() +
         static_cast<std::size_t>(k - 1) * K_ + i;
}

std::size_t RegisterLayout::ancilla(Site site, int k, int i) const {
  check(k, 1, Mbar_, i, "ancilla");
  return 2 * photonic_count() + 2 * memory_count() + static_cast<std::size_t>(site) * memory_count() +
         static_cast<std::size_t>(k - 1) * K_ + i;
}

}  // namespace qlbi
