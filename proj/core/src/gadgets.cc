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

#include "qlbi/gadgets.h"

#include <string>

#include "qlbi/error.h"
#include "qlbi/rng.h"

namespace qlbi {

SparseState logical_beamsplitter(const SparseState& state, std::size_t e, std::size_t f) {
  if (e == f || e >= state.num_qubits() || f >= state.num_qubits()) {
    throw Error(ErrorKind::kInvalidArgument, "beam splitter needs two distinct qubits in range");
  }
  for (const auto& entry : state.entries()) {
    if (entry.key.test(e) == entry.key.test(f)) {
      throw Error(ErrorKind::kPrecondition, "beam splitter input leaves the one-excitation subspace of (E, F)");
    }
  }
  const Gate gates[] = {Gate::cnot(e, f), Gate::h(e), Gate::cnot(e, f), Gate::x(e), Gate::x(f), Gate::z(f)};
  return apply_gates(state, gates);
}

SparseState logical_phase(const SparseState& state, std::size_t qubit, double phi) {
  return apply_gate(state, Gate::phase(qubit, phi));
}

bool holds_phi_plus(const SparseState& state, std::size_t a, std::size_t b) {
  // Undo the preparation circuit; phi+ maps back to |00>.
  const Gate undo[] = {Gate::cnot(a, b), Gate::h(a)};
  const auto s = apply_gates(state, undo);
  return s.qubit_is_zero(a) && s.qubit_is_zero(b);
}

std::vector<Branch> teleported_cnot(const SparseState& state, const TeleportedCnot& plan, EbitLedger* ledger) {
  const std::size_t c = plan.control.qubit;
  const std::size_t t = plan.target.qubit;
  const std::size_t near = plan.bell_control_side.qubit;
  const std::size_t far = plan.bell_target_side.qubit;
  if (plan.control.site == plan.target.site) {
    throw Error(ErrorKind::kPrecondition, "teleported CNOT needs control and target at different sites");
  }
  if (plan.bell_control_side.site != plan.control.site || plan.bell_target_side.site != plan.target.site) {
    throw Error(ErrorKind::kPrecondition, "Bell-pair halves must sit at the control and target sites");
  }
  if (!holds_phi_plus(state, near, far)) {
    throw Error(ErrorKind::kPrecondition, "teleported CNOT needs a fresh phi+ pair");
  }
  if (ledger != nullptr) ++ledger->consumed;

  std::vector<Branch> out;
  const auto s1 = apply_gate(state, Gate::cnot(c, near));
  for (auto& zb : measure_qubit_z(s1, near)) {
    const int m1 = zb.outcomes.front().eigenvalue;
    auto s2 = zb.state;
    if (m1 < 0) s2 = apply_gate(apply_gate(s2, Gate::x(far)), Gate::x(near));  // correct, then reset near half
    s2 = apply_gate(s2, Gate::cnot(far, t));
    for (auto& xb : measure_qubit_x(s2, far)) {
      const int m2 = xb.outcomes.front().eigenvalue;
      auto s3 = apply_gate(xb.state, Gate::h(far));
      if (m2 < 0) {
        s3 = apply_gate(s3, Gate::x(far));
        s3 = apply_gate(s3, Gate::z(c));
      }
      Branch b;
      b.outcomes = {zb.outcomes.front(), xb.outcomes.front()};
      b.probability = zb.probability * xb.probability;
      b.state = std::move(s3);
      out.push_back(std::move(b));
    }
  }
  return out;
}

SparseState teleported_cnot(const SparseState& state, const TeleportedCnot& plan, Rng& rng, EbitLedger* ledger) {
  return sample_branch(teleported_cnot(state, plan, ledger), rng).state;
}

}  // namespace qlbi
