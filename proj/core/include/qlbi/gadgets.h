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

#include "qlbi/statevec.h"

namespace qlbi {

class Rng;

/// A qubit tagged with the telescope site that holds it.
struct SiteQubit {
  std::size_t qubit;
  int site;
};

/// Counts shared Bell pairs consumed by teleported gates.
struct EbitLedger {
  std::size_t consumed = 0;
};

/// 50-50 beam splitter on a single excitation shared by logical qubits E and
/// F: a|10> + b|01> -> (a+b)/sqrt2 |10> + (a-b)/sqrt2 |01>. Realised as
/// CNOT(E->F), H(E), CNOT(E->F) followed by the local Pauli frame X_E X_F Z_F
/// that aligns the output labels with the optical convention.
SparseState logical_beamsplitter(const SparseState& state, std::size_t e, std::size_t f);

/// Multiplies the |1> component of `qubit` by e^{i phi}.
SparseState logical_phase(const SparseState& state, std::size_t qubit, double phi);

/// True when (a, b) holds phi+ in a product with the rest of the register.
bool holds_phi_plus(const SparseState& state, std::size_t a, std::size_t b);

struct TeleportedCnot {
  SiteQubit control;
  SiteQubit target;
  /// Bell-pair half co-located with the control.
  SiteQubit bell_control_side;
  /// Bell-pair half co-located with the target.
  SiteQubit bell_target_side;
};

/// Remote CNOT through one shared phi+ pair: CNOT(control -> near half),
/// Z-measure the near half, X-correct the far half, CNOT(far half -> target),
/// X-measure the far half, Z-correct the control. Returns all four
/// measurement branches with corrections applied and both Bell halves reset
/// to |0>.
std::vector<Branch> teleported_cnot(const SparseState& state, const TeleportedCnot& plan,
                                    EbitLedger* ledger = nullptr);
SparseState teleported_cnot(const SparseState& state, const TeleportedCnot& plan, Rng& rng,
                            EbitLedger* ledger = nullptr);

}  // namespace qlbi
