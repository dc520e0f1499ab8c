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

// Straightforward 2^n state vector used as an independent reference for the
// sparse engine. Qubit q is bit q of the index.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qlbi/statevec.h"

namespace qlbi::testing {

using cdouble = std::complex<double>;

class DenseState {
 public:
  explicit DenseState(std::size_t n) : n_(n), amp_(std::size_t{1} << n) { amp_[0] = 1.0; }

  static DenseState from_sparse(const SparseState& s) {
    DenseState d(s.num_qubits());
    d.amp_[0] = 0.0;
    for (const auto& e : s.entries()) d.amp_[index_of(e.key, s.num_qubits())] += e.amp;
    return d;
  }

  static std::size_t index_of(const BasisKey& key, std::size_t n) {
    std::size_t idx = 0;
    for (std::size_t q = 0; q < n; ++q) {
      if (key.test(q)) idx |= std::size_t{1} << q;
    }
    return idx;
  }

  std::size_t num_qubits() const { return n_; }
  const std::vector<cdouble>& amplitudes() const { return amp_; }
  std::vector<cdouble>& amplitudes() { return amp_; }

  void x(std::size_t q) {
    const std::size_t m = std::size_t{1} << q;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if (!(i & m)) std::swap(amp_[i], amp_[i | m]);
    }
  }
  void z(std::size_t q) { phase(q, M_PI); }
  void phase(std::size_t q, double phi) {
    const std::size_t m = std::size_t{1} << q;
    const cdouble f = std::polar(1.0, phi);
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if (i & m) amp_[i] *= f;
    }
  }
  void h(std::size_t q) {
    const std::size_t m = std::size_t{1} << q;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if (!(i & m)) {
        const cdouble a = amp_[i];
        const cdouble b = amp_[i | m];
        amp_[i] = s * (a + b);
        amp_[i | m] = s * (a - b);
      }
    }
  }
  void cnot(std::size_t c, std::size_t t) {
    const std::size_t mc = std::size_t{1} << c;
    const std::size_t mt = std::size_t{1} << t;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if ((i & mc) && !(i & mt)) std::swap(amp_[i], amp_[i | mt]);
    }
  }
  void cz(std::size_t a, std::size_t b) {
    const std::size_t m = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if ((i & m) == m) amp_[i] = -amp_[i];
    }
  }

  /// Applies the Pauli product P (X and Z factors on distinct qubits).
  DenseState apply_pauli(const PauliString& p) const {
    DenseState out = *this;
    for (const auto& t : p) {
      if (t.pauli == Pauli::kX) {
        out.x(t.qubit);
      } else {
        out.z(t.qubit);
      }
    }
    return out;
  }

  /// (1 + e P)/2 |psi>, unnormalised, with its squared norm.
  DenseState project(const PauliString& p, int eigenvalue, double* probability) const {
    const DenseState pp = apply_pauli(p);
    DenseState out = *this;
    double norm = 0.0;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      out.amp_[i] = 0.5 * (amp_[i] + static_cast<double>(eigenvalue) * pp.amp_[i]);
      norm += std::norm(out.amp_[i]);
    }
    *probability = norm;
    if (norm > 0.0) {
      for (auto& a : out.amp_) a /= std::sqrt(norm);
    }
    return out;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }

  double max_abs_diff(const DenseState& o) const {
    double d = 0.0;
    for (std::size_t i = 0; i < amp_.size(); ++i) d = std::max(d, std::abs(amp_[i] - o.amp_[i]));
    return d;
  }

 private:
  std::size_t n_;
  std::vector<cdouble> amp_;
};

inline double sparse_vs_dense_state(const SparseState& s, const DenseState& d) {
  return DenseState::from_sparse(s).max_abs_diff(d);
}

}  // namespace qlbi::testing
