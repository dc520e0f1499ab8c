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

#include "qlbi/modes.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "qlbi/error.h"
#include "text.h"

namespace qlbi {
namespace {

constexpr double kPi = std::numbers::pi;

double norm_of(const std::vector<cdouble>& v, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) s += w[n] * std::norm(v[n]);
  return std::sqrt(s);
}

cdouble inner_of(const std::vector<cdouble>& a, const std::vector<cdouble>& b,
                 const std::vector<double>& w) {
  cdouble s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += w[n] * std::conj(a[n]) * b[n];
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

ApertureConfig::ApertureConfig(double delta, double beta) : delta_(delta), beta_(beta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::kInvalidArgument, "aperture length delta must be > 0, got " + fmt(delta));
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::kInvalidArgument, "half-baseline beta must be >= 0, got " + fmt(beta));
  }
}

double ApertureConfig::sigma() const { return 2.0 * kPi / delta_; }

Scene::Scene(std::vector<PointSource> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw Error(ErrorKind::kInvalidArgument, "scene needs at least one source");
  double total = 0.0;
  for (const auto& src : sources_) {
    if (!std::isfinite(src.x)) throw Error(ErrorKind::kInvalidArgument, "source position not finite");
    if (!(src.brightness > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "source brightness must be > 0, got " + fmt(src.brightness));
    }
    total += src.brightness;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "brightnesses must sum to 1, got " + fmt(total));
  }
}

double psf_eval(const ApertureConfig& aperture, double x) {
  const double u = 0.5 * aperture.delta() * x;
  const double amp = std::sqrt(aperture.delta() / (2.0 * kPi));
  if (std::abs(u) < 1e-8) return amp * (1.0 - u * u / 6.0);
  return amp * std::sin(u) / u;
}

std::string_view basis_kind_name(BasisKind kind) {
  return kind == BasisKind::kPsfAdapted ? "psf-adapted" : "gaussian-hg";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "psf-adapted") return BasisKind::kPsfAdapted;
  if (name == "gaussian-hg") return BasisKind::kGaussianHg;
  throw Error(ErrorKind::kInvalidArgument, "unknown basis kind '" + std::string(name) + "'");
}

double gaussian_psf_width(const ApertureConfig& aperture) { return std::sqrt(3.0) / aperture.delta(); }

cdouble ModeBasis::inner(std::size_t i, std::size_t j) const {
  return inner_of(modes_.at(i), modes_.at(j), grid_.weights);
}

double ModeBasis::orthonormality_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      const cdouble target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(inner(i, j) - target));
    }
  }
  return worst;
}

double ModeBasis::mode_value(std::size_t q, double x) const {
  const auto& phi = modes_.at(q);
  cdouble s = 0.0;
  for (std::size_t n = 0; n < grid_.size(); ++n) {
    s += grid_.weights[n] * phi[n] * std::polar(1.0, grid_.nodes[n] * x);
  }
  return s.real() / std::sqrt(2.0 * kPi);
}

double ModeBasis::psf_value(double x) const {
  if (kind_ == BasisKind::kPsfAdapted) return psf_eval(ApertureConfig(delta_, 0.0), x);
  const double s = gaussian_width_;
  return std::pow(2.0 * kPi * s * s, -0.25) * std::exp(-x * x / (4.0 * s * s));
}

std::vector<double> ModeBasis::overlaps_at(double xs) const {
  // Shift by xs multiplies the pupil amplitude by e^{-ik xs}.
  std::vector<cdouble> shifted(grid_.size());
  for (std::size_t n = 0; n < grid_.size(); ++n) {
    shifted[n] = grid_.weights[n] * pupil_[n] * std::polar(1.0, -grid_.nodes[n] * xs);
  }
  std::vector<double> gamma(size());
  for (std::size_t q = 0; q < size(); ++q) {
    cdouble s = 0.0;
    const auto& phi = modes_[q];
    for (std::size_t n = 0; n < grid_.size(); ++n) s += std::conj(phi[n]) * shifted[n];
    gamma[q] = s.real();
  }
  return gamma;
}

ModeBasis ModeBasis::truncated(std::size_t K) const {
  if (K < 1 || K > size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "cannot truncate a " + std::to_string(size()) + "-mode basis to " + std::to_string(K));
  }
  ModeBasis out = *this;
  out.modes_.resize(K);
  return out;
}

ModeBasis build_basis(const ApertureConfig& aperture, std::size_t K, BasisKind kind,
                      const PupilGrid& grid) {
  if (K < 1) throw Error(ErrorKind::kInvalidArgument, "mode count K must be >= 1");
  ModeBasis basis;
  basis.kind_ = kind;
  basis.delta_ = aperture.delta();
  const cdouble I(0.0, 1.0);

  if (kind == BasisKind::kPsfAdapted) {
    const double half = 0.5 * aperture.delta();
    basis.grid_ = composite_gauss_legendre(-half, half, grid.panels, grid.order);
    basis.pupil_.assign(basis.grid_.size(), cdouble(1.0 / std::sqrt(aperture.delta()), 0.0));
    const auto& w = basis.grid_.weights;
    for (std::size_t q = 0; q < K; ++q) {
      // Candidate: the PSF for q = 0, else the derivative of the previous mode
      // (multiplication by ik in the pupil). This spans the same space as the
      // raw derivatives psi, psi', psi'', ... with far better conditioning.
      std::vector<cdouble> cand(basis.grid_.size());
      if (q == 0) {
        cand = basis.pupil_;
      } else {
        const auto& prev = basis.modes_.back();
        for (std::size_t n = 0; n < cand.size(); ++n) cand[n] = I * basis.grid_.nodes[n] * prev[n];
      }
      const double start = norm_of(cand, w);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& done : basis.modes_) {
          const cdouble c = inner_of(done, cand, w);
          for (std::size_t n = 0; n < cand.size(); ++n) cand[n] -= c * done[n];
        }
      }
      const double residual = norm_of(cand, w);
      if (!(start > 0.0) || residual < 1e-10 * start) {
        throw Error(ErrorKind::kBasisDegenerate,
                    "Gram-Schmidt residual vanished at mode q=" + std::to_string(q) +
                        " (relative norm " + fmt(start > 0.0 ? residual / start : 0.0) + ")");
      }
      for (auto& v : cand) v /= residual;
      basis.modes_.push_back(std::move(cand));
    }
  } else {
    const double s = gaussian_psf_width(aperture);
    basis.gaussian_width_ = s;
    const double kmax = grid.gaussian_extent / s;
    basis.grid_ = composite_gauss_legendre(-kmax, kmax, grid.panels, grid.order);
    const std::size_t n_nodes = basis.grid_.size();
    // Hermite functions h_q(u) at u = sqrt(2) s k; the Fourier image of the
    // x-domain mode picks up (-i)^q.
    const double scale = std::sqrt(2.0) * s;
    std::vector<double> h_prev(n_nodes, 0.0);
    std::vector<double> h_cur(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const double u = scale * basis.grid_.nodes[n];
      h_cur[n] = std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
    }
    cdouble phase = 1.0;
    for (std::size_t q = 0; q < K; ++q) {
      std::vector<cdouble> mode(n_nodes);
      for (std::size_t n = 0; n < n_nodes; ++n) mode[n] = phase * std::sqrt(scale) * h_cur[n];
      basis.modes_.push_back(std::move(mode));
      std::vector<double> h_next(n_nodes);
      const double qd = static_cast<double>(q);
      for (std::size_t n = 0; n < n_nodes; ++n) {
        const double u = scale * basis.grid_.nodes[n];
        h_next[n] = std::sqrt(2.0 / (qd + 1.0)) * u * h_cur[n] - std::sqrt(qd / (qd + 1.0)) * h_prev[n];
      }
      h_prev = std::move(h_cur);
      h_cur = std::move(h_next);
      phase *= -I;
    }
    basis.pupil_ = basis.modes_.front();
  }
  return basis;
}

std::vector<double> normalize_overlaps(const std::vector<double>& gamma, double xs) {
  double total = 0.0;
  for (double g : gamma) total += g * g;
  if (total < 1e-14) {
    throw Error(ErrorKind::kProjectionDegenerate,
                "source at x=" + fmt(xs) + " has no support in the first " + std::to_string(gamma.size()) +
                    " modes (sum Gamma^2 = " + fmt(total) + ")");
  }
  const double norm = std::sqrt(total);
  std::vector<double> eta(gamma.size());
  for (std::size_t q = 0; q < gamma.size(); ++q) eta[q] = gamma[q] / norm;
  return eta;
}

OverlapTable overlaps(const ModeBasis& basis, const Scene& scene) {
  OverlapTable table;
  for (const auto& src : scene.sources()) {
    auto gamma = basis.overlaps_at(src.x);
    table.eta.push_back(normalize_overlaps(gamma, src.x));
    table.gamma.push_back(std::move(gamma));
  }
  return table;
}

void write_overlap_csv(std::ostream& out, const Scene& scene, const OverlapTable& table) {
  out << "q,x,gamma,eta\n";
  using internal::shortest;
  for (std::size_t s = 0; s < scene.size(); ++s) {
    for (std::size_t q = 0; q < table.modes(); ++q) {
      out << q << ',' << shortest(scene[s].x) << ',' << shortest(table.gamma[s][q]) << ','
          << shortest(table.eta[s][q]) << '\n';
    }
  }
}

}  // namespace qlbi
