// Copyright 2026 The twistwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Momentum-space analysis of a translation-invariant step: Bloch operator,
// quasi-energy bands, coin eigenstates, group velocities and the winding of
// the coin eigenstates on the Poincare sphere.
//
// Conventions:
//  * |k> = sum_m e^{-ikm}|m> (m in lattice units of |2q|), so the raising
//    shift becomes the phase e^{+ik} on the flipped L -> R component.
//  * Wave plates and q-plates are SU(2); quasi-energies are quoted for
//    e^{i*reference_phase} U_k. The default reference pi/2 puts the step in
//    the determinant -1 form of a Hadamard-type coin, for which the QWP +
//    q-plate step has w2(k) = asin(sin k / sqrt 2), w1 = pi - w2.
//  * Band 2 is the band with quasi-energy closest to zero at k = 0; labels
//    are carried to other k by eigenvector continuity.
//  * Eigenvectors are gauge-fixed with <L|phi> real and nonnegative (or
//    <R|phi> when the L component vanishes).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"

namespace twistwalk {

struct SpectralOptions {
  double reference_phase = kPi / 2.0;
  bool mirror = false;  // use e^{-ik} for the raising shift
};

struct BlochOperator {
  double k = 0.0;
  Mat2 physical;  // product of element matrices at quasi-momentum k
  double reference_phase = 0.0;

  /// e^{i*reference_phase} times the physical step; its eigenvalues are e^{-iw}.
  Mat2 matrix() const { return physical * std::polar(1.0, reference_phase); }
};

inline Mat2 element_bloch_matrix(const OpticalElement& el, double k, bool mirror = false) {
  if (const auto* wp = std::get_if<WavePlate>(&el)) return wp->matrix();
  const auto& qp = std::get<QPlate>(el);
  const double c = std::cos(qp.retardance / 2.0);
  const double s = std::sin(qp.retardance / 2.0);
  const double dir = (qp.shift() > 0 ? 1.0 : -1.0) * (mirror ? -1.0 : 1.0);
  const cplx raise = std::polar(1.0, dir * k);
  const cplx mi{0.0, -1.0};
  return {c, mi * s * std::polar(1.0, -2.0 * qp.axis_offset) / raise,
          mi * s * std::polar(1.0, 2.0 * qp.axis_offset) * raise, c};
}

inline BlochOperator bloch_operator(const StepSequence& seq, double k, const SpectralOptions& opts = {}) {
  Mat2 u = Mat2::identity();
  for (const auto& el : seq.elements()) u = element_bloch_matrix(el, k, opts.mirror) * u;
  return {k, u, opts.reference_phase};
}

/// Quasi-energy in (-pi, pi] of a unit-modulus eigenvalue e^{-iw}.
inline double quasi_energy(cplx eigenvalue) {
  double w = -std::arg(eigenvalue);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline PolState fix_gauge(PolState v) {
  v = v.normalized();
  const cplx ref = std::abs(v.left) > 1e-12 ? v.left : v.right;
  const cplx phase = std::conj(ref) / std::abs(ref);
  v.left *= phase;
  v.right *= phase;
  if (std::abs(v.left) > 1e-12) v.left = std::abs(v.left);
  else v.right = std::abs(v.right);
  return v;
}

struct Eigen2 {
  std::array<cplx, 2> values;
  std::array<PolState, 2> vectors;
};

/// Eigendecomposition of a 2x2 normal matrix; vectors are gauge-fixed.
inline Eigen2 eigen_decompose(const Mat2& a) {
  const cplx half_tr = 0.5 * a.trace();
  const cplx disc = std::sqrt(half_tr * half_tr - a.det());
  Eigen2 out;
  out.values = {half_tr + disc, half_tr - disc};
  const double scale = std::max({std::abs(a.a00), std::abs(a.a01), std::abs(a.a10), std::abs(a.a11), 1.0});
  for (int i = 0; i < 2; ++i) {
    const cplx lam = out.values[i];
    const PolState c1{a.a01, lam - a.a00};
    const PolState c2{lam - a.a11, a.a10};
    const double n1 = c1.norm_sq();
    const double n2 = c2.norm_sq();
    PolState v;
    if (std::max(n1, n2) > 1e-24 * scale * scale) {
      v = n1 >= n2 ? c1 : c2;
    } else {
      // Diagonal matrix: pick the basis vector whose diagonal entry matches.
      v = std::abs(a.a00 - lam) <= std::abs(a.a11 - lam) ? PolState::L() : PolState::R();
    }
    out.vectors[i] = fix_gauge(v);
  }
  return out;
}

using Stokes = std::array<double, 3>;

/// Stokes vector on the circular basis: (2 Re(L* R), 2 Im(L* R), |L|^2 - |R|^2).
inline Stokes stokes_vector(const PolState& v) {
  const cplx x = std::conj(v.left) * v.right;
  return {2.0 * x.real(), 2.0 * x.imag(), std::norm(v.left) - std::norm(v.right)};
}

struct BandPoint {
  std::array<double, 2> omega;      // [band 1, band 2]
  std::array<PolState, 2> states;
};

namespace detail {

inline Eigen2 checked_eigen(const BlochOperator& u) {
  const Eigen2 e = eigen_decompose(u.matrix());
  if (std::abs(e.values[0] - e.values[1]) < 1e-9)
    throw DegenerateBandError("bands touch at k = " + std::to_string(u.k));
  return e;
}

/// Orders the eigenpairs as [band 1, band 2] following the reference states.
inline BandPoint label_by_continuity(const Eigen2& e, const std::array<PolState, 2>& ref) {
  const double keep = std::norm(inner(ref[0], e.vectors[0])) + std::norm(inner(ref[1], e.vectors[1]));
  const double swap = std::norm(inner(ref[0], e.vectors[1])) + std::norm(inner(ref[1], e.vectors[0]));
  const int b1 = keep >= swap ? 0 : 1;
  const int b2 = 1 - b1;
  return {{quasi_energy(e.values[b1]), quasi_energy(e.values[b2])}, {e.vectors[b1], e.vectors[b2]}};
}

inline BandPoint reference_point(const StepSequence& seq, const SpectralOptions& opts) {
  const Eigen2 e = checked_eigen(bloch_operator(seq, 0.0, opts));
  const int b2 = std::abs(quasi_energy(e.values[0])) <= std::abs(quasi_energy(e.values[1])) ? 0 : 1;
  const int b1 = 1 - b2;
  return {{quasi_energy(e.values[b1]), quasi_energy(e.values[b2])}, {e.vectors[b1], e.vectors[b2]}};
}

}  // namespace detail

struct BandStructure {
  std::vector<double> k;
  std::array<std::vector<double>, 2> omega;  // [0] band 1, [1] band 2
  std::array<std::vector<PolState>, 2> states;
  std::array<std::vector<Stokes>, 2> stokes;

  std::size_t size() const { return k.size(); }
};

/// Uniform grid of n points covering (-pi, pi].
inline std::vector<double> brillouin_grid(int n) {
  if (n < 2) throw ValidationError("k grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(j)] = -kPi + 2.0 * kPi * (j + 1) / n;
  return g;
}

/// Bands on a sorted k grid within (-pi, pi].
inline BandStructure dispersion(const StepSequence& seq, const std::vector<double>& k_grid,
                                const SpectralOptions& opts = {}) {
  if (k_grid.empty()) throw ValidationError("empty k grid");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > -kPi - 1e-12 && k_grid[i] <= kPi + 1e-12))
      throw ValidationError("k grid must lie within (-pi, pi]");
    if (i > 0 && !(k_grid[i] > k_grid[i - 1])) throw ValidationError("k grid must be strictly increasing");
  }
  const std::size_t n = k_grid.size();
  std::vector<BandPoint> points(n);
  const BandPoint ref = detail::reference_point(seq, opts);

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(k_grid[i]) < std::abs(k_grid[start])) start = i;

  auto solve = [&](std::size_t i, const BandPoint& prev) {
    points[i] = detail::label_by_continuity(detail::checked_eigen(bloch_operator(seq, k_grid[i], opts)),
                                            prev.states);
  };
  solve(start, ref);
  for (std::size_t i = start + 1; i < n; ++i) solve(i, points[i - 1]);
  for (std::size_t i = start; i-- > 0;) solve(i, points[i + 1]);

  BandStructure bs;
  bs.k = k_grid;
  for (int b = 0; b < 2; ++b) {
    bs.omega[b].reserve(n);
    bs.states[b].reserve(n);
    bs.stokes[b].reserve(n);
    for (const auto& p : points) {
      bs.omega[b].push_back(p.omega[b]);
      bs.states[b].push_back(p.states[b]);
      bs.stokes[b].push_back(stokes_vector(p.states[b]));
    }
  }
  return bs;
}

/// Band point at a single k, labelled by continuity from k = 0.
inline BandPoint band_point(const StepSequence& seq, double k, const SpectralOptions& opts = {}) {
  const double kk = wrap_angle(k);
  constexpr int kSteps = 64;
  BandPoint p = detail::reference_point(seq, opts);
  for (int j = 1; j <= kSteps; ++j) {
    const BlochOperator u = bloch_operator(seq, kk * j / kSteps, opts);
    p = detail::label_by_continuity(detail::checked_eigen(u), p.states);
  }
  return p;
}

/// Coin eigenstate phi_band(k), band in {1, 2}.
inline PolState band_eigenstate(const StepSequence& seq, int band, double k, const SpectralOptions& opts = {}) {
  if (band != 1 && band != 2) throw ValidationError("band must be 1 or 2");
  return band_point(seq, k, opts).states[static_cast<std::size_t>(band - 1)];
}

/// True when the step is QWP(45 deg) followed by a tuned q-plate with q > 0
/// and a0 = 0, the Hadamard-like walk with a closed-form dispersion.
inline bool has_closed_form_dispersion(const StepSequence& seq) {
  const auto& els = seq.elements();
  if (els.size() != 2) return false;
  const auto* wp = std::get_if<WavePlate>(&els[0]);
  const auto* qp = std::get_if<QPlate>(&els[1]);
  if (!wp || !qp) return false;
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  return near(wp->retardance, kPi / 2.0) && near(std::remainder(wp->axis_angle - kPi / 4.0, kPi), 0.0) &&
         near(qp->retardance, kPi) && near(std::remainder(qp->axis_offset, kPi), 0.0) && qp->shift() > 0;
}

/// Closed-form quasi-energies [w1, w2] of the Hadamard-like walk, wrapped to (-pi, pi].
inline std::array<double, 2> closed_form_quasi_energies(double k, bool mirror = false) {
  const double kk = mirror ? -k : k;
  const double w2 = std::asin(std::sin(kk) / std::numbers::sqrt2);
  return {wrap_angle(kPi - w2), w2};
}

enum class VelocityMethod { Auto, ClosedForm, FiniteDifference };

inline constexpr double kVelocityStep = 1e-5;

/// Group velocities [V1, V2] in lattice sites per step.
inline std::array<double, 2> group_velocity(const StepSequence& seq, double k, const SpectralOptions& opts = {},
                                            VelocityMethod method = VelocityMethod::Auto) {
  const bool closed = has_closed_form_dispersion(seq) && std::abs(opts.reference_phase - kPi / 2.0) < 1e-15;
  if (method == VelocityMethod::ClosedForm && !closed)
    throw ValidationError("closed-form group velocity does not apply to this step");
  if (method == VelocityMethod::ClosedForm || (method == VelocityMethod::Auto && closed)) {
    band_point(seq, k, opts);  // degeneracy check
    const double sign = opts.mirror ? -1.0 : 1.0;
    const double v2 = sign * std::cos(k) / std::sqrt(2.0 - std::sin(k) * std::sin(k));
    return {-v2, v2};
  }
  const BandPoint mid = band_point(seq, k, opts);
  const double h = kVelocityStep;
  const BandPoint plus =
      detail::label_by_continuity(detail::checked_eigen(bloch_operator(seq, k + h, opts)), mid.states);
  const BandPoint minus =
      detail::label_by_continuity(detail::checked_eigen(bloch_operator(seq, k - h, opts)), mid.states);
  return {wrap_angle(plus.omega[0] - minus.omega[0]) / (2.0 * h),
          wrap_angle(plus.omega[1] - minus.omega[1]) / (2.0 * h)};
}

struct StokesCircle {
  std::vector<double> k;
  std::vector<Stokes> points;  // band 1
  Stokes normal{};             // unit normal of the best-fit plane through the origin
  double residual = 0.0;       // max |p . normal|
};

namespace detail {

inline Stokes orient(Stokes n) {
  // Canonical orientation: first of (z, x, y) with a non-negligible component is positive.
  for (int idx : {2, 0, 1}) {
    if (std::abs(n[idx]) > 1e-9) {
      if (n[idx] < 0) for (auto& c : n) c = -c;
      break;
    }
  }
  return n;
}

}  // namespace detail

inline constexpr double kPlanarityTolerance = 1e-6;

/// Stokes trajectory of phi_1(k) and its best-fit great circle.
inline StokesCircle eigenstate_circle(const StepSequence& seq, const std::vector<double>& k_grid,
                                      const SpectralOptions& opts = {}) {
  const BandStructure bs = dispersion(seq, k_grid, opts);
  StokesCircle out;
  out.k = bs.k;
  out.points = bs.stokes[0];
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : out.points) {
    const Eigen::Vector3d v(p[0], p[1], p[2]);
    scatter += v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(scatter);
  const Eigen::Vector3d n = solver.eigenvectors().col(0);
  out.normal = detail::orient({n(0), n(1), n(2)});
  for (const auto& p : out.points)
    out.residual = std::max(out.residual, std::abs(p[0] * out.normal[0] + p[1] * out.normal[1] + p[2] * out.normal[2]));
  if (out.residual > kPlanarityTolerance)
    throw NotPlanarError("coin eigenstates leave the great circle (residual " + std::to_string(out.residual) + ")");
  return out;
}

struct Winding {
  int value = 0;
  double raw = 0.0;       // accumulated angle / 2 pi
  double residual = 0.0;  // planarity residual of the trajectory
};

/// Signed number of turns of phi_1(k) around the fitted plane normal as k
/// sweeps the Brillouin zone.
inline Winding winding_number(const StepSequence& seq, int k_points = 4096, const SpectralOptions& opts = {}) {
  const StokesCircle circle = eigenstate_circle(seq, brillouin_grid(k_points), opts);
  const Stokes& n = circle.normal;
  // In-plane basis (e1, e2) with e1 x e2 = n.
  Eigen::Vector3d nv(n[0], n[1], n[2]);
  Eigen::Vector3d trial = std::abs(nv.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (trial - trial.dot(nv) * nv).normalized();
  const Eigen::Vector3d e2 = nv.cross(e1);
  std::vector<double> angle;
  angle.reserve(circle.points.size());
  for (const auto& p : circle.points) {
    const Eigen::Vector3d v(p[0], p[1], p[2]);
    angle.push_back(std::atan2(v.dot(e2), v.dot(e1)));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < angle.size(); ++i)
    total += wrap_angle(angle[(i + 1) % angle.size()] - angle[i]);
  Winding w;
  w.raw = total / (2.0 * kPi);
  w.value = static_cast<int>(std::lround(w.raw));
  w.residual = circle.residual;
  if (std::abs(w.raw - w.value) > 1e-6) throw NumericError("winding did not close to an integer");
  return w;
}

}  // namespace twistwalk
