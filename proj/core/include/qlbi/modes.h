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

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "qlbi/quadrature.h"

namespace qlbi {

using cdouble = std::complex<double>;

/// Geometry of the two-telescope array: two apertures of length `delta`
/// centred at -beta and +beta.
class ApertureConfig {
 public:
  ApertureConfig(double delta, double beta);

  static ApertureConfig from_ratio(double delta, double r) { return {delta, 0.5 * r * delta}; }

  double delta() const { return delta_; }
  double beta() const { return beta_; }
  /// Rayleigh angle 2*pi/delta.
  double sigma() const;
  /// Baseline ratio 2*beta/delta.
  double r() const { return 2.0 * beta_ / delta_; }

 private:
  double delta_;
  double beta_;
};

struct PointSource {
  double x;
  double brightness;
};

class Scene {
 public:
  explicit Scene(std::vector<PointSource> sources);

  /// Equal-brightness pair at -theta and +theta.
  static Scene two_point(double theta) { return Scene({{-theta, 0.5}, {theta, 0.5}}); }
  static Scene single(double x) { return Scene({{x, 1.0}}); }

  const std::vector<PointSource>& sources() const { return sources_; }
  std::size_t size() const { return sources_.size(); }
  const PointSource& operator[](std::size_t s) const { return sources_[s]; }

 private:
  std::vector<PointSource> sources_;
};

/// L2-normalised sinc PSF sqrt(delta/2pi) sin(delta x/2)/(delta x/2).
double psf_eval(const ApertureConfig& aperture, double x);

enum class BasisKind { kPsfAdapted, kGaussianHg };

std::string_view basis_kind_name(BasisKind kind);
BasisKind parse_basis_kind(std::string_view name);

/// Pupil-plane quadrature grid. The sinc PSF is the Fourier image of a flat
/// pupil on [-delta/2, delta/2], so mode functions are sampled there, where
/// they have compact support and Gauss-Legendre panels integrate them to
/// machine precision.
struct PupilGrid {
  int panels = 16;
  int order = 16;
  /// Half-width of the Gaussian pupil grid, in units of 1/s (s = PSF width).
  double gaussian_extent = 12.0;
};

/// RMS width s of the Gaussian PSF used by the Hermite-Gauss basis,
/// exp(-x^2/4s^2). Chosen as sqrt(3)/delta so its single-aperture QFI equals the
/// sinc PSF's delta^2/3.
double gaussian_psf_width(const ApertureConfig& aperture);

/// K orthonormal spatial modes, stored by their pupil-plane amplitudes
/// Phi_q(k) on a quadrature grid. Mode 0 is the PSF itself. The x-domain
/// function is phi_q(x) = (2pi)^{-1/2} int Phi_q(k) e^{ikx} dk.
class ModeBasis {
 public:
  BasisKind kind() const { return kind_; }
  std::size_t size() const { return modes_.size(); }
  const QuadratureRule& grid() const { return grid_; }
  /// Pupil amplitude of the PSF at each grid node.
  const std::vector<cdouble>& pupil() const { return pupil_; }
  const std::vector<cdouble>& mode(std::size_t q) const { return modes_.at(q); }

  /// <phi_i, phi_j> on the quadrature grid.
  cdouble inner(std::size_t i, std::size_t j) const;
  /// max_{i,j} |<phi_i, phi_j> - delta_ij|.
  double orthonormality_error() const;

  /// phi_q(x) evaluated by inverse transform on the grid.
  double mode_value(std::size_t q, double x) const;
  /// The PSF this basis was built for (sinc or Gaussian), evaluated in x.
  double psf_value(double x) const;

  /// Gamma_q(x_s) = int phi_q(x) psi(x - x_s) dx for every q < size().
  std::vector<double> overlaps_at(double xs) const;

  /// First K modes of this basis.
  ModeBasis truncated(std::size_t K) const;

 private:
  friend ModeBasis build_basis(const ApertureConfig&, std::size_t, BasisKind, const PupilGrid&);

  BasisKind kind_ = BasisKind::kPsfAdapted;
  double delta_ = 0.0;
  double gaussian_width_ = 0.0;
  QuadratureRule grid_;
  std::vector<cdouble> pupil_;
  std::vector<std::vector<cdouble>> modes_;
};

/// psf-adapted: modified Gram-Schmidt (two passes) on the PSF and its
/// successive derivatives. gaussian-hg: closed-form Hermite-Gauss modes of a
/// Gaussian PSF of width gaussian_psf_width(aperture).
ModeBasis build_basis(const ApertureConfig& aperture, std::size_t K, BasisKind kind,
                      const PupilGrid& grid = {});

/// Gamma_q and eta_q for every source of a scene, indexed [source][q].
struct OverlapTable {
  std::vector<std::vector<double>> gamma;
  std::vector<std::vector<double>> eta;

  std::size_t modes() const { return gamma.empty() ? 0 : gamma.front().size(); }
};

OverlapTable overlaps(const ModeBasis& basis, const Scene& scene);

/// eta_q from Gamma_q; throws projection-degenerate if sum Gamma^2 < 1e-14.
std::vector<double> normalize_overlaps(const std::vector<double>& gamma, double xs);

/// CSV with header `q,x,gamma,eta`, one row per (source, mode).
void write_overlap_csv(std::ostream& out, const Scene& scene, const OverlapTable& table);

}  // namespace qlbi
