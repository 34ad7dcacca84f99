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

// Spin-orbit photon states on a truncated OAM lattice and the optical
// elements (wave plates, q-plates) that evolve them.
//
// Polarization basis is circular, |L> = (|H> + i|V>)/sqrt(2) and
// |R> = (|H> - i|V>)/sqrt(2). The coin state |up> is |L>, which moves up in m.
//
// A retarder with retardance d and fast axis at angle t acts as
//   |L> -> cos(d/2)|L> - i sin(d/2) e^{+2it}|R>
//   |R> -> cos(d/2)|R> - i sin(d/2) e^{-2it}|L>
// so a half-wave plate at 0 maps |L> to -i|R>. A q-plate is the same retarder
// with a local axis q*phi + a0, which adds the OAM shift +-2q to the flipped
// component.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/metrics.hpp"

namespace twistwalk {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultEdgeTolerance = 1e-10;

/// Angle mapped to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

enum class Pol : int { L = 0, R = 1 };

inline std::string_view pol_name(Pol p) { return p == Pol::L ? "L" : "R"; }

/// Two-component coin (polarization) amplitude on the circular basis.
struct PolState {
  cplx left{1.0, 0.0};
  cplx right{0.0, 0.0};

  static PolState L() { return {1.0, 0.0}; }
  static PolState R() { return {0.0, 1.0}; }

  double norm_sq() const { return std::norm(left) + std::norm(right); }
  bool is_normalized(double tol = 1e-12) const { return std::abs(norm_sq() - 1.0) <= tol; }

  PolState normalized() const {
    const double n = std::sqrt(norm_sq());
    if (n == 0.0) throw ValidationError("cannot normalize a zero polarization state");
    return {left / n, right / n};
  }

  cplx operator[](Pol p) const { return p == Pol::L ? left : right; }
};

inline cplx inner(const PolState& a, const PolState& b) {
  return std::conj(a.left) * b.left + std::conj(a.right) * b.right;
}

/// 2x2 complex matrix on the (L, R) basis, row-major.
struct Mat2 {
  cplx a00{1.0}, a01{0.0}, a10{0.0}, a11{1.0};

  static Mat2 identity() { return {}; }

  Mat2 operator*(const Mat2& o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  Mat2 operator*(cplx s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  PolState operator*(const PolState& v) const {
    return {a00 * v.left + a01 * v.right, a10 * v.left + a11 * v.right};
  }

  Mat2 adjoint() const { return {std::conj(a00), std::conj(a10), std::conj(a01), std::conj(a11)}; }
  cplx trace() const { return a00 + a11; }
  cplx det() const { return a00 * a11 - a01 * a10; }

  double max_abs_diff(const Mat2& o) const {
    return std::max({std::abs(a00 - o.a00), std::abs(a01 - o.a01), std::abs(a10 - o.a10),
                     std::abs(a11 - o.a11)});
  }
  double unitarity_residual() const { return (adjoint() * *this).max_abs_diff(identity()); }
};

/// Jones matrix of a uniform retarder on the circular basis.
inline Mat2 retarder_matrix(double retardance, double axis_angle) {
  const double c = std::cos(retardance / 2.0);
  const double s = std::sin(retardance / 2.0);
  const cplx mi{0.0, -1.0};
  return {c, mi * s * std::polar(1.0, -2.0 * axis_angle), mi * s * std::polar(1.0, 2.0 * axis_angle), c};
}

struct WavePlate {
  double retardance = kPi;  // radians
  double axis_angle = 0.0;  // radians

  static WavePlate half(double axis) { return {kPi, axis}; }
  static WavePlate quarter(double axis) { return {kPi / 2.0, axis}; }

  Mat2 matrix() const { return retarder_matrix(retardance, axis_angle); }
};

struct QPlate {
  double charge = 0.5;       // topological charge q
  double retardance = kPi;   // tuning, [0, pi]
  double axis_offset = 0.0;  // a0

  /// OAM shift 2q carried by the flipped component.
  int shift() const { return static_cast<int>(std::lround(2.0 * charge)); }

  void validate() const {
    const double twice = 2.0 * charge;
    if (!std::isfinite(twice) || std::abs(twice - std::round(twice)) > 1e-12 || std::lround(twice) == 0)
      throw ValidationError("q-plate charge must be a nonzero half-integer, got " + std::to_string(charge));
    if (!(retardance >= 0.0 && retardance <= kPi))
      throw ValidationError("q-plate retardance must lie in [0, pi], got " + std::to_string(retardance));
    if (!std::isfinite(axis_offset)) throw ValidationError("q-plate axis offset must be finite");
  }
};

using OpticalElement = std::variant<WavePlate, QPlate>;

/// Ordered list of optical elements forming one walk step. Light traverses
/// the elements front to back.
class StepSequence {
 public:
  explicit StepSequence(std::vector<OpticalElement> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw ValidationError("step sequence must contain at least one element");
    for (const auto& el : elements_) {
      if (const auto* wp = std::get_if<WavePlate>(&el)) {
        if (!std::isfinite(wp->retardance) || !std::isfinite(wp->axis_angle))
          throw ValidationError("wave plate parameters must be finite");
      } else {
        const auto& qp = std::get<QPlate>(el);
        qp.validate();
        const int s = std::abs(qp.shift());
        if (spacing_ != 0 && s != spacing_)
          throw ValidationError("all q-plates in a step must share the same |2q|");
        spacing_ = s;
      }
    }
  }

  /// QWP at 45 deg, q-plate (axis 0), HWP at 0.
  static StepSequence standard_paper(double delta = kPi, double charge = 0.5) {
    return StepSequence({WavePlate::quarter(kPi / 4.0), QPlate{charge, delta, 0.0}, WavePlate::half(0.0)});
  }

  /// QWP at 45 deg followed by a q-plate; no compensating HWP.
  static StepSequence wavepacket(double delta = kPi, double charge = 0.5) {
    return StepSequence({WavePlate::quarter(kPi / 4.0), QPlate{charge, delta, 0.0}});
  }

  static StepSequence preset(std::string_view name, double delta = kPi, double charge = 0.5) {
    if (name == "standard-paper") return standard_paper(delta, charge);
    if (name == "wavepacket") return wavepacket(delta, charge);
    throw ValidationError("unknown step preset '" + std::string(name) + "'");
  }

  const std::vector<OpticalElement>& elements() const { return elements_; }

  /// Lattice unit |2q|; 1 when the step contains no q-plate.
  int lattice_spacing() const { return spacing_ == 0 ? 1 : spacing_; }

  /// Largest OAM displacement produced by one step.
  int max_displacement() const {
    int total = 0;
    for (const auto& el : elements_)
      if (const auto* qp = std::get_if<QPlate>(&el)) total += std::abs(qp->shift());
    return total;
  }

 private:
  std::vector<OpticalElement> elements_;
  int spacing_ = 0;
};

/// Inclusive OAM range [min, max].
struct OamWindow {
  int min = 0;
  int max = 0;

  int size() const { return max - min + 1; }
  bool contains(int m) const { return m >= min && m <= max; }
  bool operator==(const OamWindow&) const = default;

  static OamWindow symmetric(int half_width) { return {-half_width, half_width}; }

  /// Window that holds an n-step walk started at m=0 without touching the edges.
  static OamWindow for_steps(const StepSequence& seq, int steps) {
    return symmetric((steps + 2) * seq.max_displacement());
  }
};

/// Walker+coin wavefunction on a truncated OAM window. Amplitudes are stored
/// polarization-major: index = pol * size + (m - min).
class SpinOrbitState {
 public:
  explicit SpinOrbitState(OamWindow window, double edge_tolerance = kDefaultEdgeTolerance)
      : window_(check_window(window)), amps_(2 * static_cast<std::size_t>(window.size())),
        edge_tolerance_(edge_tolerance) {}

  SpinOrbitState(OamWindow window, std::vector<cplx> amplitudes,
                 double edge_tolerance = kDefaultEdgeTolerance)
      : window_(check_window(window)), amps_(std::move(amplitudes)), edge_tolerance_(edge_tolerance) {
    if (amps_.size() != 2 * static_cast<std::size_t>(window_.size()))
      throw ValidationError("amplitude array does not match the OAM window");
  }

  const OamWindow& window() const { return window_; }
  double edge_tolerance() const { return edge_tolerance_; }
  void set_edge_tolerance(double tol) { edge_tolerance_ = tol; }

  cplx amplitude(Pol p, int m) const { return window_.contains(m) ? amps_[index(p, m)] : cplx{}; }
  cplx& at(Pol p, int m) {
    if (!window_.contains(m)) throw WindowError("OAM " + std::to_string(m) + " outside window");
    return amps_[index(p, m)];
  }

  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }
  std::span<const cplx> component(Pol p) const {
    return std::span<const cplx>(amps_).subspan(static_cast<std::size_t>(p) * width(), width());
  }
  std::span<cplx> component(Pol p) {
    return std::span<cplx>(amps_).subspan(static_cast<std::size_t>(p) * width(), width());
  }

  /// Coin amplitudes at a single OAM site.
  PolState coin_at(int m) const { return {amplitude(Pol::L, m), amplitude(Pol::R, m)}; }

  double norm_sq() const {
    double sum = 0.0;
    for (const auto& a : amps_) sum += std::norm(a);
    return sum;
  }

  /// Largest amplitude magnitude on the two boundary sites.
  double edge_magnitude() const {
    double mx = 0.0;
    for (Pol p : {Pol::L, Pol::R})
      mx = std::max({mx, std::abs(amplitude(p, window_.min)), std::abs(amplitude(p, window_.max))});
    return mx;
  }

  void check_edges() const {
    const double e = edge_magnitude();
    if (e >= edge_tolerance_)
      throw TruncationError("amplitude " + std::to_string(e) + " reached the OAM window edge [" +
                            std::to_string(window_.min) + ", " + std::to_string(window_.max) + "]");
  }

  /// Same state on a different window; sites outside the new window must be empty.
  SpinOrbitState rewindowed(OamWindow w) const {
    SpinOrbitState out(w, edge_tolerance_);
    for (Pol p : {Pol::L, Pol::R})
      for (int m = window_.min; m <= window_.max; ++m) {
        const cplx a = amplitude(p, m);
        if (a == cplx{}) continue;
        if (!w.contains(m)) throw WindowError("nonzero amplitude outside the requested window");
        out.at(p, m) = a;
      }
    return out;
  }

 private:
  static OamWindow check_window(OamWindow w) {
    if (w.max < w.min) throw WindowError("empty OAM window");
    return w;
  }
  std::size_t width() const { return static_cast<std::size_t>(window_.size()); }
  std::size_t index(Pol p, int m) const {
    return static_cast<std::size_t>(p) * width() + static_cast<std::size_t>(m - window_.min);
  }

  OamWindow window_;
  std::vector<cplx> amps_;
  double edge_tolerance_;
};

inline SpinOrbitState make_localized_state(int m0, const PolState& coin, OamWindow window) {
  if (!window.contains(m0))
    throw WindowError("initial OAM " + std::to_string(m0) + " outside window [" + std::to_string(window.min) +
                      ", " + std::to_string(window.max) + "]");
  if (!coin.is_normalized()) throw ValidationError("coin state must be normalized");
  SpinOrbitState s(window);
  s.at(Pol::L, m0) = coin.left;
  s.at(Pol::R, m0) = coin.right;
  return s;
}

/// Applies the same 2x2 coin matrix at every OAM site.
inline SpinOrbitState apply_coin(SpinOrbitState state, const Mat2& coin) {
  auto l = state.component(Pol::L);
  auto r = state.component(Pol::R);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const cplx a = l[i];
    const cplx b = r[i];
    l[i] = coin.a00 * a + coin.a01 * b;
    r[i] = coin.a10 * a + coin.a11 * b;
  }
  return state;
}

inline SpinOrbitState apply_waveplate(SpinOrbitState state, double retardance, double axis_angle) {
  return apply_coin(std::move(state), retarder_matrix(retardance, axis_angle));
}

/// |L,m> -> cos(d/2)|L,m> - i sin(d/2) e^{+2i a0}|R,m+2q>
/// |R,m> -> cos(d/2)|R,m> - i sin(d/2) e^{-2i a0}|L,m-2q>
inline SpinOrbitState apply_qplate(const SpinOrbitState& state, double charge, double retardance,
                                   double axis_offset = 0.0) {
  const QPlate qp{charge, retardance, axis_offset};
  qp.validate();
  const int shift = qp.shift();
  const double c = std::cos(retardance / 2.0);
  const double s = std::sin(retardance / 2.0);
  const cplx up = cplx{0.0, -s} * std::polar(1.0, 2.0 * axis_offset);
  const cplx down = cplx{0.0, -s} * std::polar(1.0, -2.0 * axis_offset);

  const OamWindow w = state.window();
  SpinOrbitState out(w, state.edge_tolerance());
  auto in_l = state.component(Pol::L);
  auto in_r = state.component(Pol::R);
  auto out_l = out.component(Pol::L);
  auto out_r = out.component(Pol::R);
  const int n = w.size();
  for (int i = 0; i < n; ++i) {
    cplx l = c * in_l[i];
    cplx r = c * in_r[i];
    if (const int j = i + shift; j >= 0 && j < n) l += down * in_r[j];
    if (const int j = i - shift; j >= 0 && j < n) r += up * in_l[j];
    out_l[i] = l;
    out_r[i] = r;
  }
  out.check_edges();
  return out;
}

inline SpinOrbitState apply_element(const SpinOrbitState& state, const OpticalElement& el) {
  return std::visit(
      [&](const auto& e) -> SpinOrbitState {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, WavePlate>)
          return apply_waveplate(state, e.retardance, e.axis_angle);
        else
          return apply_qplate(state, e.charge, e.retardance, e.axis_offset);
      },
      el);
}

inline SpinOrbitState apply_step(SpinOrbitState state, const StepSequence& seq) {
  state.check_edges();
  for (const auto& el : seq.elements()) state = apply_element(state, el);
  return state;
}

/// States after steps 0..n (index 0 is the input).
inline std::vector<SpinOrbitState> evolve(const SpinOrbitState& initial, const StepSequence& seq, int steps) {
  if (steps < 0) throw ValidationError("number of steps must be nonnegative");
  std::vector<SpinOrbitState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(initial);
  for (int n = 0; n < steps; ++n) out.push_back(apply_step(out.back(), seq));
  return out;
}

inline SpinOrbitState evolve_final(SpinOrbitState state, const StepSequence& seq, int steps) {
  if (steps < 0) throw ValidationError("number of steps must be nonnegative");
  for (int n = 0; n < steps; ++n) state = apply_step(std::move(state), seq);
  return state;
}

/// P(m) summed over polarization.
inline ProbDist<int> oam_marginal(const SpinOrbitState& state) {
  ProbDist<int>::map_type p;
  const OamWindow w = state.window();
  for (int m = w.min; m <= w.max; ++m)
    p.emplace(m, std::norm(state.amplitude(Pol::L, m)) + std::norm(state.amplitude(Pol::R, m)));
  return ProbDist<int>(std::move(p));
}

struct PolOam {
  Pol pol;
  int m;
  auto operator<=>(const PolOam&) const = default;
};

inline ProbDist<PolOam> full_distribution(const SpinOrbitState& state) {
  ProbDist<PolOam>::map_type p;
  const OamWindow w = state.window();
  for (Pol pol : {Pol::L, Pol::R})
    for (int m = w.min; m <= w.max; ++m) p.emplace(PolOam{pol, m}, std::norm(state.amplitude(pol, m)));
  return ProbDist<PolOam>(std::move(p));
}

/// Reduced coin density matrix (trace over the walker).
inline Mat2 coin_density_matrix(const SpinOrbitState& state) {
  Mat2 rho{0.0, 0.0, 0.0, 0.0};
  auto l = state.component(Pol::L);
  auto r = state.component(Pol::R);
  for (std::size_t i = 0; i < l.size(); ++i) {
    rho.a00 += std::norm(l[i]);
    rho.a01 += l[i] * std::conj(r[i]);
    rho.a11 += std::norm(r[i]);
  }
  rho.a10 = std::conj(rho.a01);
  return rho;
}

/// Von Neumann entropy (bits) of the reduced coin state.
inline double coin_walker_entanglement(const SpinOrbitState& state) {
  const Mat2 rho = coin_density_matrix(state);
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw ValidationError("entanglement of a zero state");
  // Eigenvalues of a 2x2 Hermitian matrix.
  const double half_diff = 0.5 * (rho.a00.real() - rho.a11.real());
  const double radius = std::sqrt(half_diff * half_diff + std::norm(rho.a01));
  double entropy = 0.0;
  for (double lambda : {0.5 * tr + radius, 0.5 * tr - radius}) {
    const double p = lambda / tr;
    if (p > 1e-300) entropy -= p * std::log2(p);
  }
  return std::max(0.0, entropy);
}

}  // namespace twistwalk
