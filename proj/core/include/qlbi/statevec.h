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

#include <array>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qlbi {

class Rng;

using cdouble = std::complex<double>;

constexpr std::size_t kMaxQubits = 512;
constexpr std::size_t kNoQubit = static_cast<std::size_t>(-1);

/// Computational-basis label over up to kMaxQubits qubits. Qubit 0 is the
/// first character of the textual form.
class BasisKey {
 public:
  bool test(std::size_t q) const { return (words_[q >> 6] >> (q & 63)) & 1U; }
  void flip(std::size_t q) { words_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
  void set(std::size_t q, bool v) {
    if (test(q) != v) flip(q);
  }
  int popcount() const;

  std::string to_string(std::size_t num_qubits) const;
  static BasisKey from_string(std::string_view bits);

  auto operator<=>(const BasisKey&) const = default;

 private:
  std::array<std::uint64_t, kMaxQubits / 64> words_{};
};

/// Sparse complex amplitudes over n qubits, kept sorted by key with entries
/// of magnitude below kPruneThreshold dropped.
class SparseState {
 public:
  static constexpr double kPruneThreshold = 1e-15;

  struct Entry {
    BasisKey key;
    cdouble amp;
  };

  SparseState() = default;
  /// |0...0> on `num_qubits` qubits.
  explicit SparseState(std::size_t num_qubits);

  /// Sorts, merges duplicate keys and prunes. No renormalisation.
  static SparseState from_entries(std::size_t num_qubits, std::vector<Entry> entries);

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  cdouble amplitude(const BasisKey& key) const;
  double norm_squared() const;
  /// True when qubit q reads 0 in every stored entry (a product |0> factor).
  bool qubit_is_zero(std::size_t q) const;

  SparseState scaled(cdouble factor) const;

 private:
  std::size_t num_qubits_ = 0;
  std::vector<Entry> entries_;
};

SparseState init_basis_state(std::size_t num_qubits, std::string_view bits);

enum class GateKind { kX, kH, kZ, kPhase, kCnot, kCz };

struct Gate {
  GateKind kind;
  std::size_t target;
  std::size_t control = kNoQubit;
  double angle = 0.0;

  static Gate x(std::size_t q) { return {GateKind::kX, q}; }
  static Gate h(std::size_t q) { return {GateKind::kH, q}; }
  static Gate z(std::size_t q) { return {GateKind::kZ, q}; }
  static Gate phase(std::size_t q, double phi) { return {GateKind::kPhase, q, kNoQubit, phi}; }
  static Gate cnot(std::size_t control, std::size_t target) { return {GateKind::kCnot, target, control}; }
  static Gate cz(std::size_t a, std::size_t b) { return {GateKind::kCz, b, a}; }
};

SparseState apply_gate(const SparseState& state, const Gate& gate);
SparseState apply_gates(SparseState state, std::span<const Gate> gates);

enum class Pauli : char { kX = 'X', kZ = 'Z' };

struct PauliTerm {
  std::size_t qubit;
  Pauli pauli;

  bool operator==(const PauliTerm&) const = default;
};

using PauliString = std::vector<PauliTerm>;

PauliString x_string(std::span<const std::size_t> qubits);

struct Outcome {
  PauliString observable;
  int eigenvalue;  // +1 or -1
};

struct Branch {
  std::vector<Outcome> outcomes;
  double probability = 1.0;
  SparseState state;
};

/// Projective measurement of a Pauli product: the +1 branch first, then -1.
/// Zero-probability branches are omitted; post-states are renormalised.
std::vector<Branch> measure_pauli_string(const SparseState& state, const PauliString& observable);
std::vector<Branch> measure_qubit_x(const SparseState& state, std::size_t qubit);
std::vector<Branch> measure_qubit_z(const SparseState& state, std::size_t qubit);

/// Depth-first expansion of every nonzero-probability outcome sequence of
/// `plan`. Throws enumeration-overflow beyond `cap` leaves.
std::vector<Branch> enumerate_branches(const SparseState& state, const std::vector<PauliString>& plan,
                                       std::size_t cap = std::size_t{1} << 20);

/// Born-rule choice among sibling branches.
const Branch& sample_branch(const std::vector<Branch>& branches, Rng& rng);

/// Resets qubits that are in a product state with the rest of the register
/// back to |0>, discarding their (unentangled) local state. Throws
/// precondition if they are entangled with anything else.
SparseState release_qubits(const SparseState& state, std::span<const std::size_t> qubits);

/// max over basis keys of |a(key) - b(key)|.
double max_abs_diff(const SparseState& a, const SparseState& b);

/// Debug dump: [{"bitstring": "...", "re": .., "im": ..}, ...].
std::string to_json(const SparseState& state);

enum class Site { kA = 0, kB = 1 };

/// Flat qubit indices for the protocol registers. Photonic qubits (site,
/// temporal mode j in 1..M, spatial mode i in 0..K-1) come first, then the
/// memory registers (site, bit k in 1..Mbar, i), then the Bell ancillas
/// (C at site A, D at site B; k, i).
class RegisterLayout {
 public:
  RegisterLayout(int M, int K);

  int temporal_modes() const { return M_; }
  int spatial_modes() const { return K_; }
  /// ceil(log2(M + 1)).
  int memory_bits() const { return Mbar_; }
  std::size_t num_qubits() const { return 2 * photonic_count() + 4 * memory_count(); }

  std::size_t photonic(Site site, int j, int i) const;
  std::size_t memory(Site site, int k, int i) const;
  std::size_t ancilla(Site site, int k, int i) const;

  std::size_t photonic_count() const { return static_cast<std::size_t>(M_) * K_; }
  std::size_t memory_count() const { return static_cast<std::size_t>(Mbar_) * K_; }

 private:
  void check(int k_or_j, int lo, int hi, int i, const char* what) const;

  int M_;
  int K_;
  int Mbar_;
};

}  // namespace qlbi
