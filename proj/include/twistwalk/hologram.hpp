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

// Phase-only holograms that encode a complex field A e^{iP} in the first
// diffraction order of a blazed grating:
//   F = M(A) * Mod(P + B - pi M(A), 2 pi),  M(A) = 1 + Sinc^{-1}(A) / pi,
// with Sinc^{-1} taken on the branch [-pi, 0].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/radial.hpp"

namespace twistwalk {

inline constexpr double kInverseSincTolerance = 1e-10;

/// x in [-pi, 0] with sin(x)/x = a, for a in [0, 1].
inline double inverse_sinc(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw AmplitudeRangeError("amplitude " + std::to_string(a) + " outside [0, 1]");
  if (a == 1.0) return 0.0;
  if (a == 0.0) return -kPi;
  auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
  double lo = -kPi;  // sinc = 0
  double hi = 0.0;   // sinc = 1
  while (hi - lo > kInverseSincTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (sinc(mid) < a) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double modulation_depth(double a) { return 1.0 + inverse_sinc(a) / kPi; }

struct HologramGrid {
  int width = 256;
  int height = 256;
  double pixel_pitch = 20e-6;  // metres
  double carrier = 1.0 / (8 * 20e-6);  // blazed-grating frequency along x, cycles per metre

  void validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("hologram grid must be nonempty");
    if (!(pixel_pitch > 0.0)) throw ValidationError("pixel pitch must be positive");
    if (!std::isfinite(carrier)) throw ValidationError("carrier frequency must be finite");
  }
  /// Pixel-centre coordinates relative to the grid centre.
  double x(int i) const { return (i - 0.5 * (width - 1)) * pixel_pitch; }
  double y(int j) const { return (j - 0.5 * (height - 1)) * pixel_pitch; }
};

struct HologramMap {
  HologramGrid grid;
  std::vector<double> phase;       // F in [0, 2 pi), row-major (y, x)
  std::vector<double> modulation;  // M(A) per pixel

  double at(int i, int j) const { return phase[index(i, j)]; }
  double modulation_at(int i, int j) const { return modulation[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.width) + static_cast<std::size_t>(i);
  }
  /// First-order phase P + B recovered from F where M > 0 (mod 2 pi).
  double encoded_phase(int i, int j) const {
    const double m = modulation_at(i, j);
    return m > 0.0 ? at(i, j) / m + kPi * m : 0.0;
  }
};

inline double blazed_grating(const HologramGrid& g, double x) {
  const double b = std::fmod(2.0 * kPi * g.carrier * x, 2.0 * kPi);
  return b < 0.0 ? b + 2.0 * kPi : b;
}

namespace detail {

inline double wrap_2pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

}  // namespace detail

/// Hologram for pointwise amplitude A(x, y) in [0, 1] and phase P(x, y).
inline HologramMap make_hologram(const HologramGrid& grid, const std::function<double(double, double)>& amplitude,
                                 const std::function<double(double, double)>& phase) {
  grid.validate();
  HologramMap h;
  h.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height);
  h.phase.resize(n);
  h.modulation.resize(n);
  for (int j = 0; j < grid.height; ++j)
    for (int i = 0; i < grid.width; ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const double m = modulation_depth(amplitude(x, y));
      const double f = m * detail::wrap_2pi(phase(x, y) + blazed_grating(grid, x) - kPi * m);
      h.phase[h.index(i, j)] = f < 2.0 * kPi ? f : 0.0;
      h.modulation[h.index(i, j)] = m;
    }
  return h;
}

/// Hologram of a sampled complex field, amplitude normalized to its peak.
inline HologramMap make_hologram(const HologramGrid& grid, const std::function<cplx(double, double)>& field) {
  grid.validate();
  double peak = 0.0;
  for (int j = 0; j < grid.height; ++j)
    for (int i = 0; i < grid.width; ++i) peak = std::max(peak, std::abs(field(grid.x(i), grid.y(j))));
  if (peak <= 0.0) throw AmplitudeRangeError("target field vanishes on the grid");
  return make_hologram(
      grid, [&](double x, double y) { return std::min(1.0, std::abs(field(x, y)) / peak); },
      [&](double x, double y) { return std::arg(field(x, y)); });
}

/// Field sum_m c_m LG_{0,m}(r, phi, 0) of a walker superposition.
inline HologramMap make_oam_hologram(const HologramGrid& grid, const std::map<int, cplx>& coefficients,
                                     const Beam& beam) {
  if (coefficients.empty()) throw ValidationError("no OAM coefficients");
  return make_hologram(grid, [&](double x, double y) {
    const double r = std::hypot(x, y);
    const double phi = std::atan2(y, x);
    cplx sum{};
    for (const auto& [m, c] : coefficients) sum += c * lg_amplitude(0, m, r, phi, 0.0, beam);
    return sum;
  });
}

/// Walker amplitudes of a coin-walker product state (the dominant
/// polarization component, normalized).
inline std::map<int, cplx> walker_amplitudes(const SpinOrbitState& state) {
  if (coin_walker_entanglement(state) > 1e-9)
    throw ValidationError("walker part is undefined for a coin-walker entangled state");
  const Mat2 rho = coin_density_matrix(state);
  const Pol pol = rho.a00.real() >= rho.a11.real() ? Pol::L : Pol::R;
  const double norm = std::sqrt(pol == Pol::L ? rho.a00.real() : rho.a11.real());
  if (norm <= 0.0) throw ValidationError("zero state");
  std::map<int, cplx> out;
  const OamWindow w = state.window();
  for (int m = w.min; m <= w.max; ++m)
    if (const cplx a = state.amplitude(pol, m); std::abs(a) > 0.0) out.emplace(m, a / norm);
  return out;
}

inline HologramMap make_state_hologram(const HologramGrid& grid, const SpinOrbitState& state, const Beam& beam) {
  return make_oam_hologram(grid, walker_amplitudes(state), beam);
}

/// Net number of 2 pi windings of the encoded phase around the grid centre on
/// a ring of the given radius (pixels). The grating contributes none, so this
/// is the order of the fork dislocation.
inline int fork_order(const HologramMap& h, double radius_px, int samples = 720) {
  if (!(radius_px > 0.0)) throw ValidationError("ring radius must be positive");
  const double cx = 0.5 * (h.grid.width - 1);
  const double cy = 0.5 * (h.grid.height - 1);
  if (radius_px > std::min(cx, cy)) throw ValidationError("ring leaves the hologram");
  std::vector<double> angle;
  angle.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    const double t = 2.0 * kPi * s / samples;
    const int i = static_cast<int>(std::lround(cx + radius_px * std::cos(t)));
    const int j = static_cast<int>(std::lround(cy + radius_px * std::sin(t)));
    if (h.modulation_at(i, j) <= 0.0) throw NumericError("ring crosses a zero-amplitude pixel");
    angle.push_back(h.encoded_phase(i, j));
  }
  double total = 0.0;
  for (std::size_t s = 0; s < angle.size(); ++s) total += wrap_angle(angle[(s + 1) % angle.size()] - angle[s]);
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Ring radius (pixels) with the largest mean modulation depth.
inline double strongest_ring(const HologramMap& h) {
  const double cx = 0.5 * (h.grid.width - 1);
  const double cy = 0.5 * (h.grid.height - 1);
  const int rmax = static_cast<int>(std::min(cx, cy));
  double best = 0.0;
  int best_r = std::max(1, rmax / 2);
  for (int r = 2; r <= rmax; ++r) {
    double sum = 0.0;
    const int n = 90;
    for (int s = 0; s < n; ++s) {
      const double t = 2.0 * kPi * s / n;
      sum += h.modulation_at(static_cast<int>(std::lround(cx + r * std::cos(t))),
                             static_cast<int>(std::lround(cy + r * std::sin(t))));
    }
    if (sum > best) {
      best = sum;
      best_r = r;
    }
  }
  return best_r;
}

/// Binary P5 graymap, level floor(F * 256 / 2 pi) clamped to 255. Each
/// comment line is written into the header after a '#'.
inline void write_pgm(std::ostream& os, const HologramMap& h, const std::vector<std::string>& comments = {}) {
  os << "P5\n";
  for (const auto& c : comments) os << "# " << c << '\n';
  os << h.grid.width << ' ' << h.grid.height << "\n255\n";
  std::string row(static_cast<std::size_t>(h.grid.width), '\0');
  for (int j = 0; j < h.grid.height; ++j) {
    for (int i = 0; i < h.grid.width; ++i) {
      const int level = std::clamp(static_cast<int>(std::floor(h.at(i, j) * 256.0 / (2.0 * kPi))), 0, 255);
      row[static_cast<std::size_t>(i)] = static_cast<char>(static_cast<std::uint8_t>(level));
    }
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace twistwalk
