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
#include <optional>
#include <span>
#include <vector>

#include "qlbi/modes.h"
#include "qlbi/outcome.h"
#include "qlbi/statevec.h"

namespace qlbi {

class Rng;

/// Ancilla and E/F readout style. Parity measures joint X...X strings, which
/// keeps enumeration polynomial; individual measures every qubit in X.
enum class MeasurementMode { kParity, kIndividual };

struct ProtocolConfig {
  ApertureConfig aperture{2.0 * 3.141592653589793, 0.0};
  ModeBasis basis;
  Scene scene = Scene::single(0.0);
  /// Temporal modes per block.
  int M = 3;
  /// Mean photons per temporal mode; used only by unconditional blocks.
  double epsilon = 0.01;
  MeasurementMode measurement = MeasurementMode::kParity;
  /// When false, run_block emits vacuum blocks with probability 1 - M*epsilon.
  bool conditional = true;
  /// Test fixture: reports the uncorrected sign when f = -1.
  bool fault_skip_f_correction = false;
};

/// Stored X-basis results of the photonic support qubits, one entry per
/// spatio-temporal pair (m, q): outcomes at site A and site B (+1/-1).
struct XResultTable {
  struct PairResult {
    int m;
    int q;
    int a;
    int b;
  };
  std::vector<PairResult> pairs;

  const PairResult* find(int m, int q) const;
};

/// +1 when both sites saw the same X result for (m, q), -1 otherwise.
int f_sign(const XResultTable& table, int m, int q);

/// zeta+ (+1) for an even number of odd-parity pairs, zeta- (-1) for odd.
int zeta_decision(int odd_parity_pairs);

struct StageCounts {
  std::size_t inject = 0;
  std::size_t encode = 0;
  std::size_t measure = 0;
  std::size_t prepare = 0;
  std::size_t decode = 0;
  std::size_t flip = 0;
  std::size_t zeta = 0;
};

struct PhotonRecord {
  std::size_t source = 0;
  int m = 0;
  int q = 0;
  /// Pairwise outcome after the f correction (+1 symmetric, -1 antisymmetric).
  int sign = 0;
  /// zeta outcome before correction.
  int zeta = 0;
  int flipped_pairs = 0;
  int f = 0;
  std::size_t ebits = 0;
  StageCounts counts;
};

SparseState inject_photon(const RegisterLayout& layout, const ApertureConfig& aperture, std::span<const double> eta,
                          double xs, int m);

/// Photon-to-memory CNOTs at both sites: photonic (site, j, i) controls memory
/// (site, k, i) whenever bit k of j is set (k = 1 is the least significant).
SparseState encode(const SparseState& state, const RegisterLayout& layout);

struct PhotonMeasurement {
  XResultTable table;
  double probability = 1.0;
  SparseState state;
};

/// X-measures every photonic pair that carries an excitation and resets the
/// measured qubits; vacuum pairs are product |0> and are skipped.
std::vector<PhotonMeasurement> measure_photons(const SparseState& state, const RegisterLayout& layout);
PhotonMeasurement measure_photons(const SparseState& state, const RegisterLayout& layout, Rng& rng);

/// phi+ on every (C_ki, D_ki).
SparseState prepare_bell_ancillas(const SparseState& state, const RegisterLayout& layout);

/// CZ(A-memory_ki, C_ki) CZ(B-memory_ki, D_ki) for every (k, i).
SparseState decode_cz(const SparseState& state, const RegisterLayout& layout);

struct FlipPattern {
  int m = 0;
  int q = -1;
  std::vector<int> flipped_bits;
  double probability = 1.0;
  SparseState state;

  int flipped_count() const { return static_cast<int>(flipped_bits.size()); }
};

/// Reads the X-parity of every ancilla pair, releases the ancillas, and
/// decodes (m, q) from the flipped set. Throws decode-integrity on an empty
/// set, flips in two spatial modes, or m outside 1..M.
std::vector<FlipPattern> read_flip_pattern(const SparseState& state, const RegisterLayout& layout,
                                           MeasurementMode mode = MeasurementMode::kParity);
FlipPattern read_flip_pattern(const SparseState& state, const RegisterLayout& layout, MeasurementMode mode,
                              Rng& rng);

struct ZetaOutcome {
  int zeta = 0;
  int sign = 0;
  double probability = 1.0;
  SparseState state;
};

/// Measures the E/F registers (memory bits of m at mode q) in the zeta basis
/// and applies the f correction. The E/F qubits are released afterwards.
std::vector<ZetaOutcome> zeta_measure(const SparseState& state, const RegisterLayout& layout, int m, int q, int f,
                                      MeasurementMode mode = MeasurementMode::kParity);

/// Terminal branch of an exhaustive protocol run.
struct ProtocolLeaf {
  int m;
  int q;
  int f;
  int zeta;
  int sign;
  int flipped_pairs;
  double probability;
};

/// The full two-site pipeline for one configuration: inject, encode, photon
/// X readout, Bell-ancilla decoding and zeta readout.
class Protocol {
 public:
  explicit Protocol(ProtocolConfig config);

  const ProtocolConfig& config() const { return config_; }
  const RegisterLayout& layout() const { return layout_; }
  const OverlapTable& overlap_table() const { return overlaps_; }
  std::size_t modes() const { return config_.basis.size(); }
  /// Bell pairs consumed by one decode.
  std::size_t ebits_per_run() const { return layout_.memory_count(); }

  SparseState inject_photon(std::size_t source, int m) const;

  /// One photon, conditional on detection: samples s ~ b_s, m ~ U{1..M}.
  PhotonRecord run_once(Rng& rng) const;
  /// Pipeline for a fixed source and temporal mode.
  PhotonRecord run_injected(std::size_t source, int m, Rng& rng) const;
  /// One block. With conditional = false, returns nullopt for a vacuum block.
  std::optional<PhotonRecord> run_block(Rng& rng) const;

  std::vector<ProtocolLeaf> enumerate_leaves(std::size_t source, int m,
                                             std::size_t cap = std::size_t{1} << 20) const;
  OutcomeDistribution enumerate(std::size_t source, int m) const;
  /// Brightness-weighted mixture over sources, averaged over all m.
  OutcomeDistribution enumerate_scene() const;

 private:
  void check_sparsity(const SparseState& state, int live_hadamards) const;

  ProtocolConfig config_;
  RegisterLayout layout_;
  OverlapTable overlaps_;
};

}  // namespace qlbi
