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

// Radial-mode physics of the q-plate walk: Laguerre-Gauss and
// hypergeometric-Gauss amplitudes, the LG expansion of a q-plate output,
// near-field (pupil) overlaps, Gouy dephasing between steps and OAM-dependent
// detection efficiency.
//
// Dimensionless radial profiles use rho = r / w0 and zeta = z / z_R and are
// normalized as 2 pi * int |f|^2 rho drho = 1.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"

namespace twistwalk {

inline constexpr double kQuadratureTolerance = 1e-8;
/// Upper radial limit; e^{-2 rho^2} times any polynomial used here is below 1e-12 past it.
inline constexpr double kRadialCutoff = 7.0;

struct Beam {
  double waist = 1e-3;         // w0, metres
  double wavelength = 800e-9;  // metres

  double rayleigh_range() const { return kPi * waist * waist / wavelength; }
  double width(double z) const { const double t = z / rayleigh_range(); return waist * std::sqrt(1.0 + t * t); }
  /// Wavefront radius of curvature; infinite at the waist.
  double curvature_radius(double z) const {
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    const double zr = rayleigh_range();
    return z * (1.0 + (zr / z) * (zr / z));
  }
};

namespace detail {

inline double lg_norm(int p, int m) {
  const int am = std::abs(m);
  return std::sqrt(std::pow(2.0, am + 1) * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + am + 1.0)) / kPi);
}

template <class F>
double integrate(F&& f, double a, double b, const char* what) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12, &err, &l1);
  if (!std::isfinite(v) || err > kQuadratureTolerance * std::max(1.0, l1))
    throw QuadratureError(std::string(what) + ": quadrature did not converge (error estimate " + std::to_string(err) + ")");
  return v;
}

template <class F>
cplx integrate_complex(F&& f, double a, double b, const char* what) {
  return {integrate([&](double x) { return f(x).real(); }, a, b, what),
          integrate([&](double x) { return f(x).imag(); }, a, b, what)};
}

}  // namespace detail

/// LG_{p,m}(r, phi, z) of a beam with waist w0 and wavelength lambda.
inline cplx lg_amplitude(int p, int m, double r, double phi, double z, const Beam& beam) {
  if (p < 0) throw ValidationError("LG radial index p must be nonnegative");
  if (r < 0.0) throw ValidationError("radius must be nonnegative");
  const int am = std::abs(m);
  const double w = beam.width(z);
  const double x = r / w;
  const double radial = detail::lg_norm(p, m) / w * std::pow(x, am) * std::exp(-x * x) *
                        std::assoc_laguerre(static_cast<unsigned>(p), static_cast<unsigned>(am), 2.0 * x * x);
  const double curvature = kPi * r * r / (beam.wavelength * beam.curvature_radius(z));
  const double gouy = (2 * p + am + 1) * std::atan(z / beam.rayleigh_range());
  return radial * std::polar(1.0, curvature + m * phi - gouy);
}

/// Radial LG profile at the waist in units rho = r / w0.
inline double lg_radial(int p, int m, double rho) {
  if (p < 0) throw ValidationError("LG radial index p must be nonnegative");
  const int am = std::abs(m);
  return detail::lg_norm(p, m) * std::pow(rho, am) * std::exp(-rho * rho) *
         std::assoc_laguerre(static_cast<unsigned>(p), static_cast<unsigned>(am), 2.0 * rho * rho);
}

/// Normalized rho^s e^{-rho^2}.
inline double gaussian_vortex_profile(int s, double rho) {
  return std::sqrt(std::pow(2.0, s + 1) / (kPi * std::tgamma(s + 1.0))) * std::pow(rho, s) * std::exp(-rho * rho);
}

namespace detail {

/// e^{E} 1F1(1/2, b; z) from the Euler integral with t = sin^2(theta); the
/// Gaussian factor E is folded into the exponent so nothing overflows.
inline cplx kummer_half(double b, cplx z, cplx e) {
  const double pref = std::exp(std::lgamma(b) - std::lgamma(0.5) - std::lgamma(b - 0.5));
  auto f = [&](double th) {
    const double s = std::sin(th);
    return 2.0 * std::exp(z * s * s + e) * std::pow(std::cos(th), 2.0 * b - 2.0);
  };
  return pref * integrate_complex(f, 0.0, kPi / 2.0, "confluent hypergeometric integral");
}

/// 1F1(-n, b; z) for integer n >= 0.
inline cplx kummer_polynomial(int n, double b, cplx z) {
  cplx term = 1.0;
  cplx sum = 1.0;
  for (int k = 0; k < n; ++k) {
    term *= (static_cast<double>(k - n) / ((b + k) * (k + 1.0))) * z;
    sum += term;
  }
  return sum;
}

}  // namespace detail

/// HyGG_{p,m}(rho, zeta) for zeta >= 0. At zeta = 0 it reduces to the
/// normalized profile rho^{p+|m|} e^{-rho^2}. For zeta > 0, p must be an even
/// nonnegative integer or p = +-1 (the values produced by a q = 1/2 plate).
inline cplx hygg_amplitude(int p, int m, double rho, double zeta) {
  const int am = std::abs(m);
  if (p + am < 0) throw ValidationError("HyGG requires p + |m| >= 0");
  if (!(zeta >= 0.0)) throw ValidationError("zeta must be nonnegative");
  if (rho < 0.0) throw ValidationError("radius must be nonnegative");
  if (zeta == 0.0) return gaussian_vortex_profile(p + am, rho);

  const cplx i{0.0, 1.0};
  const double b = 1.0 + am;
  const cplx zi = zeta + i;
  const cplx arg = rho * rho / (zeta * zi);
  const cplx gauss = -i * rho * rho / zi;
  const cplx pref = std::pow(i, am + 1) *
                    std::sqrt(std::pow(2.0, p + am + 1) / (kPi * std::tgamma(p + am + 1.0))) *
                    std::exp(std::lgamma(1.0 + am + 0.5 * p) - std::lgamma(am + 1.0)) * std::pow(zeta, 0.5 * p) *
                    std::pow(zi, -(1.0 + am + 0.5 * p)) * std::pow(rho, am);
  cplx kummer;  // e^{gauss} 1F1(-p/2, b; arg)
  if (p >= 0 && p % 2 == 0) {
    kummer = std::exp(gauss) * detail::kummer_polynomial(p / 2, b, arg);
  } else if (p == -1) {
    kummer = detail::kummer_half(b, arg, gauss);
  } else if (p == 1) {
    // M(a-1, b, z) = M(a, b, z) - (z / b) M(a, b+1, z) with a = 1/2.
    kummer = detail::kummer_half(b, arg, gauss) - arg / b * detail::kummer_half(b + 1.0, arg, gauss);
  } else {
    throw ValidationError("HyGG index p = " + std::to_string(p) + " is not supported away from the pupil");
  }
  return pref * kummer;
}

/// Radial index of the q = 1/2 plate output HyGG_{|m|-|m+1|, m+1}.
inline int qplate_hygg_index(int input_m) { return std::abs(input_m) - std::abs(input_m + 1); }

struct RadialExpansion {
  int input_m = 0;
  std::vector<double> coefficients;  // c_p, p = 0..P_max
  double residual = 1.0;             // 1 - sum |c_p|^2

  double power(int p) const { return coefficients.at(static_cast<std::size_t>(p)) * coefficients.at(static_cast<std::size_t>(p)); }
};

/// LG_{p, m+1} content of the q-plate output at the pupil plane for an
/// L-polarized LG_{0,m} input, from the radial overlap integrals.
inline RadialExpansion qplate_radial_coefficients(int input_m, int p_max) {
  if (p_max < 0) throw ValidationError("P_max must be nonnegative");
  const int out_m = input_m + 1;
  const int s = std::abs(input_m);
  RadialExpansion e;
  e.input_m = input_m;
  double total = 0.0;
  for (int p = 0; p <= p_max; ++p) {
    const double c = 2.0 * kPi * detail::integrate(
                                     [&](double rho) { return lg_radial(p, out_m, rho) * gaussian_vortex_profile(s, rho) * rho; },
                                     0.0, kRadialCutoff, "radial coefficient");
    e.coefficients.push_back(c);
    total += c * c;
  }
  e.residual = 1.0 - total;
  return e;
}

namespace detail {

/// 2 pi int_0^inf rho^{s} e^{-rho^2} HyGG_{p,m}(rho, zeta) rho drho (unnormalized
/// input profile) for p = +-1 and zeta > 0. With the Euler integral for 1F1 the
/// rho integral is Gaussian and done in closed form, leaving a smooth theta
/// integral.
inline cplx hygg_gaussian_moment(int p, int m, int s, double zeta) {
  const int am = std::abs(m);
  const cplx i{0.0, 1.0};
  const double b = 1.0 + am;
  const cplx zi = zeta + i;
  const cplx pref = std::pow(i, am + 1) *
                    std::sqrt(std::pow(2.0, p + am + 1) / (kPi * std::tgamma(p + am + 1.0))) *
                    std::exp(std::lgamma(1.0 + am + 0.5 * p) - std::lgamma(am + 1.0)) * std::pow(zeta, 0.5 * p) *
                    std::pow(zi, -(1.0 + am + 0.5 * p));
  // e^{E} M(1/2, bb; z) = C(bb) int 2 e^{rho^2 g(theta)} cos^{2bb-2} dtheta,
  // g = sin^2/(zeta(zeta+i)) - i/(zeta+i); the moment of rho^{n} e^{-rho^2(1-g)}
  // is Gamma((n+1)/2) / (2 (1-g)^{(n+1)/2}).
  auto term = [&](double bb, int extra_power) {
    const double cb = std::exp(std::lgamma(bb) - std::lgamma(0.5) - std::lgamma(bb - 0.5));
    const double n = s + am + 1 + extra_power;
    const double gn = std::tgamma(0.5 * (n + 1.0));
    auto f = [&](double th) {
      const double sn = std::sin(th);
      const cplx g = sn * sn / (zeta * zi) - i / zi;
      return 2.0 * std::pow(std::cos(th), 2.0 * bb - 2.0) * gn / (2.0 * std::pow(1.0 - g, 0.5 * (n + 1.0)));
    };
    return cb * integrate_complex(f, 0.0, kPi / 2.0, "pupil overlap");
  };
  cplx moment;
  if (p == -1) moment = term(b, 0);
  else if (p == 1) moment = term(b, 0) - term(b + 1.0, 2) / (b * zeta * zi);
  else throw ValidationError("pupil overlap away from the pupil needs p = +-1");
  return 2.0 * kPi * pref * moment;
}

}  // namespace detail

/// |<input profile | q-plate output at zeta>|: overlap of HyGG_{|m|-|m+1|,m+1}
/// propagated to zeta with the unpropagated input rho^{|m|} e^{-rho^2}.
inline double pupil_overlap(int input_m, double zeta) {
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ValidationError("zeta must be nonnegative");
  const int p = qplate_hygg_index(input_m);
  const int out_m = input_m + 1;
  const int s = std::abs(input_m);
  if (zeta == 0.0) {
    return std::abs(2.0 * kPi * detail::integrate(
                                    [&](double rho) {
                                      return gaussian_vortex_profile(s, rho) * hygg_amplitude(p, out_m, rho, 0.0).real() * rho;
                                    },
                                    0.0, kRadialCutoff, "pupil overlap"));
  }
  const double norm = std::sqrt(std::pow(2.0, s + 1) / (kPi * std::tgamma(s + 1.0)));
  return std::abs(norm * detail::hygg_gaussian_moment(p, out_m, s, zeta));
}

struct PupilReport {
  int input_m = 0;
  int hygg_p = 0;
  int output_m = 0;
  double overlap = 0.0;   // at zeta = 0
  bool holds = false;     // overlap within tolerance of 1
};

/// Checks that a pupil-plane q-plate leaves the radial profile unchanged.
inline PupilReport pupil_plane_action(int input_m, double tolerance = 1e-8) {
  PupilReport r;
  r.input_m = input_m;
  r.hygg_p = qplate_hygg_index(input_m);
  r.output_m = input_m + 1;
  r.overlap = pupil_overlap(input_m, 0.0);
  r.holds = std::abs(r.overlap - 1.0) < tolerance;
  return r;
}

/// c_m -> e^{-2i|m| atan(d / z_R)} c_m on every polarization component.
inline SpinOrbitState gouy_step_dephasing(SpinOrbitState state, double d_over_zr) {
  if (!(d_over_zr >= 0.0) || !std::isfinite(d_over_zr)) throw ValidationError("d/z_R must be nonnegative");
  if (d_over_zr == 0.0) return state;
  const double theta = std::atan(d_over_zr);
  const OamWindow w = state.window();
  for (int m = w.min; m <= w.max; ++m) {
    const cplx ph = std::polar(1.0, -2.0 * std::abs(m) * theta);
    state.at(Pol::L, m) *= ph;
    state.at(Pol::R, m) *= ph;
  }
  return state;
}

/// n-step walk with free propagation over distance d between consecutive steps.
inline SpinOrbitState evolve_with_dephasing(SpinOrbitState state, const StepSequence& seq, int steps,
                                            double d_over_zr) {
  if (steps < 0) throw ValidationError("number of steps must be nonnegative");
  for (int n = 0; n < steps; ++n) {
    if (n > 0) state = gouy_step_dephasing(std::move(state), d_over_zr);
    state = apply_step(std::move(state), seq);
  }
  return state;
}

using EfficiencyMap = std::map<int, double>;

namespace detail {

inline double efficiency_at(const EfficiencyMap& eta, int m) {
  const auto it = eta.find(m);
  if (it == eta.end() || !(it->second > 0.0))
    throw ZeroEfficiencyError("no positive detection efficiency for m = " + std::to_string(m));
  if (it->second > 1.0) throw ValidationError("efficiency above one for m = " + std::to_string(m));
  return it->second;
}

}  // namespace detail

/// P_corr(m) proportional to P_raw(m) / eta(m), renormalized.
inline ProbDist<int> efficiency_correction(const ProbDist<int>& raw, const EfficiencyMap& eta) {
  ProbDist<int>::map_type out;
  double sum = 0.0;
  for (const auto& [m, p] : raw) {
    if (p <= 0.0) { out.emplace(m, 0.0); continue; }
    const double v = p / detail::efficiency_at(eta, m);
    out.emplace(m, v);
    sum += v;
  }
  if (sum <= 0.0) throw EmptyDistributionError("nothing to correct");
  for (auto& [m, v] : out) v /= sum;
  return ProbDist<int>(std::move(out));
}

/// Forward model: detected distribution proportional to P(m) eta(m).
inline ProbDist<int> apply_efficiency(const ProbDist<int>& ideal, const EfficiencyMap& eta) {
  ProbDist<int>::map_type out;
  double sum = 0.0;
  for (const auto& [m, p] : ideal) {
    const double v = p > 0.0 ? p * detail::efficiency_at(eta, m) : 0.0;
    out.emplace(m, v);
    sum += v;
  }
  if (sum <= 0.0) throw EmptyDistributionError("no detected probability");
  for (auto& [m, v] : out) v /= sum;
  return ProbDist<int>(std::move(out));
}

}  // namespace twistwalk
