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

// Gaussian wavepackets on a single band: preparation, propagation and the
// observables used to read off group velocity, spreading and band splitting.
//
// A packet on band s is |phi_s(k0)> (x) sum_j A(j) e^{-i k0 j} |j |2q|>, with
// j counted in lattice units. With this momentum convention the packet
// centre drifts by -dw/dk per step; only |drift| carries the group speed.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"
#include "twistwalk/spectral.hpp"

namespace twistwalk {

inline constexpr double kEnvelopeTail = 1e-10;

struct WavepacketSpec {
  double sigma = 2.0;  // lattice sites
  double k0 = 0.0;
  int band = 1;
  std::optional<PolState> coin_override;
  std::optional<OamWindow> window;  // chosen automatically when absent
  SpectralOptions spectral;
};

/// (phi_1(k0) + phi_2(k0)) / sqrt 2.
inline PolState band_superposition(const StepSequence& seq, double k0, const SpectralOptions& opts = {}) {
  const BandPoint p = band_point(seq, k0, opts);
  return PolState{p.states[0].left + p.states[1].left, p.states[0].right + p.states[1].right}.normalized();
}

namespace detail {

inline void validate(const WavepacketSpec& spec) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw ValidationError("sigma must be positive");
  if (!std::isfinite(spec.k0)) throw ValidationError("k0 must be finite");
  if (!spec.coin_override && spec.band != 1 && spec.band != 2) throw ValidationError("band must be 1 or 2");
}

inline double envelope(double sigma, int j) { return std::exp(-0.5 * j * j / (sigma * sigma)); }

}  // namespace detail

/// Window holding the envelope tails below kEnvelopeTail plus `steps` steps of spreading.
inline OamWindow wavepacket_window(const WavepacketSpec& spec, const StepSequence& seq, int steps) {
  detail::validate(spec);
  const int spacing = seq.lattice_spacing();
  const int tail = static_cast<int>(std::ceil(spec.sigma * std::sqrt(2.0 * std::log(1.0 / kEnvelopeTail)))) + 1;
  const int per_step = std::max(1, seq.max_displacement() / spacing);
  return OamWindow::symmetric((tail + (steps + 2) * per_step) * spacing);
}

inline SpinOrbitState make_wavepacket(const WavepacketSpec& spec, const StepSequence& seq, int steps = 0) {
  detail::validate(spec);
  const OamWindow w = spec.window.value_or(wavepacket_window(spec, seq, steps));
  const int spacing = seq.lattice_spacing();
  if (!w.contains(0)) throw WindowError("wavepacket window must contain m = 0");

  PolState coin;
  if (spec.coin_override) {
    if (!spec.coin_override->is_normalized()) throw ValidationError("coin override must be normalized");
    coin = *spec.coin_override;
  } else {
    coin = band_eigenstate(seq, spec.band, spec.k0, spec.spectral);
  }

  const double dir = spec.spectral.mirror ? 1.0 : -1.0;
  const int j_min = -((-w.min) / spacing);
  const int j_max = w.max / spacing;
  double norm = 0.0;
  for (int j = j_min; j <= j_max; ++j) norm += detail::envelope(spec.sigma, j) * detail::envelope(spec.sigma, j);
  const double a0 = 1.0 / std::sqrt(norm);
  const double edge = a0 * std::max(detail::envelope(spec.sigma, j_min), detail::envelope(spec.sigma, j_max));
  if (edge >= kEnvelopeTail)
    throw WindowError("wavepacket tails reach the window edge (amplitude " + std::to_string(edge) + ")");

  SpinOrbitState s(w);
  for (int j = j_min; j <= j_max; ++j) {
    const cplx a = a0 * detail::envelope(spec.sigma, j) * std::polar(1.0, dir * spec.k0 * j);
    s.at(Pol::L, j * spacing) = a * coin.left;
    s.at(Pol::R, j * spacing) = a * coin.right;
  }
  return s;
}

struct Propagation {
  std::vector<SpinOrbitState> states;  // steps 0..n
  std::vector<ProbDist<int>> marginals;
};

inline Propagation propagate(const WavepacketSpec& spec, const StepSequence& seq, int steps) {
  if (steps < 0) throw ValidationError("number of steps must be nonnegative");
  Propagation out;
  out.states = evolve(make_wavepacket(spec, seq, steps), seq, steps);
  out.marginals.reserve(out.states.size());
  for (const auto& s : out.states) out.marginals.push_back(oam_marginal(s));
  return out;
}

inline double mean_oam(const ProbDist<int>& p) {
  const double total = p.total();
  if (total <= 0.0) throw EmptyDistributionError("mean of an empty distribution");
  double sum = 0.0;
  for (const auto& [m, prob] : p) sum += m * prob;
  return sum / total;
}

inline double oam_variance(const ProbDist<int>& p) {
  const double mu = mean_oam(p);
  double sum = 0.0;
  for (const auto& [m, prob] : p) sum += (m - mu) * (m - mu) * prob;
  return sum / p.total();
}

/// Circular mean of the quasi-momentum distribution, arg sum_k |psi(k)|^2 e^{ik}.
inline double mean_quasi_momentum(const SpinOrbitState& s, int spacing = 1, bool mirror = false) {
  cplx acc{};
  const OamWindow w = s.window();
  for (Pol pol : {Pol::L, Pol::R})
    for (int m = w.min; m + spacing <= w.max; ++m)
      acc += s.amplitude(pol, m) * std::conj(s.amplitude(pol, m + spacing));
  return mirror ? -std::arg(acc) : std::arg(acc);
}

/// Coin-summed momentum density sum_c |sum_m e^{ikm/|2q|} psi_c(m)|^2 / 2pi.
inline std::vector<double> momentum_spectrum(const SpinOrbitState& s, const std::vector<double>& k_grid,
                                             int spacing = 1) {
  std::vector<double> out;
  out.reserve(k_grid.size());
  const OamWindow w = s.window();
  for (double k : k_grid) {
    double density = 0.0;
    for (Pol pol : {Pol::L, Pol::R}) {
      cplx sum{};
      for (int m = w.min; m <= w.max; ++m) sum += std::polar(1.0, k * m / spacing) * s.amplitude(pol, m);
      density += std::norm(sum);
    }
    out.push_back(density / (2.0 * kPi));
  }
  return out;
}

/// Expected mean-OAM drift per step (lattice units) of a packet on `band`:
/// -dw/dk for the default e^{-ikm} kets, +dw/dk for the mirrored convention.
inline double expected_drift(const StepSequence& seq, int band, double k0, const SpectralOptions& opts = {}) {
  if (band != 1 && band != 2) throw ValidationError("band must be 1 or 2");
  const double v = group_velocity(seq, k0, opts)[static_cast<std::size_t>(band - 1)];
  return opts.mirror ? v : -v;
}

struct SweepPoint {
  double k0;
  double mean;
  double variance;
};

/// Mean OAM after `steps` steps for each k0 in [0, pi].
inline std::vector<SweepPoint> brillouin_sweep(WavepacketSpec spec, const StepSequence& seq,
                                               const std::vector<double>& k0_values, int steps) {
  std::vector<SweepPoint> out;
  out.reserve(k0_values.size());
  for (double k0 : k0_values) {
    if (!(k0 >= -1e-12 && k0 <= kPi + 1e-12)) throw ValidationError("sweep k0 must lie in [0, pi]");
    spec.k0 = k0;
    const auto final = evolve_final(make_wavepacket(spec, seq, steps), seq, steps);
    const auto p = oam_marginal(final);
    out.push_back({k0, mean_oam(p), oam_variance(p)});
  }
  return out;
}

/// k0 = j pi / divisions, j = 0..divisions.
inline std::vector<double> half_zone_grid(int divisions = 8) {
  if (divisions < 1) throw ValidationError("divisions must be positive");
  std::vector<double> g;
  for (int j = 0; j <= divisions; ++j) g.push_back(kPi * j / divisions);
  return g;
}

struct CatSplit {
  ProbDist<int> marginal;
  double entropy = 0.0;     // coin-walker entanglement, bits
  double separation = 0.0;  // distance between the two dominant maxima; 0 when unimodal
  std::vector<int> peaks;   // positions of the dominant maxima, ascending
  double left_mass = 0.0;   // m < 0 plus half of m = 0
  double right_mass = 0.0;
};

/// Positions of local maxima of the 3-point moving average of P over lattice sites.
inline std::vector<int> smoothed_maxima(const ProbDist<int>& p, int spacing = 1) {
  if (p.size() == 0) return {};
  const int lo = p.begin()->first;
  const int hi = std::prev(p.end())->first;
  std::vector<int> sites;
  for (int m = lo; m <= hi; ++m)
    if ((m - lo) % spacing == 0) sites.push_back(m);
  std::vector<double> smooth(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    double sum = p[sites[i]];
    if (i > 0) sum += p[sites[i - 1]];
    if (i + 1 < sites.size()) sum += p[sites[i + 1]];
    smooth[i] = sum / 3.0;
  }
  std::vector<std::pair<double, int>> maxima;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double left = i > 0 ? smooth[i - 1] : 0.0;
    const double right = i + 1 < sites.size() ? smooth[i + 1] : 0.0;
    if (smooth[i] > 1e-12 && smooth[i] >= left && smooth[i] > right) maxima.emplace_back(smooth[i], sites[i]);
  }
  std::stable_sort(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> out;
  for (const auto& mx : maxima) out.push_back(mx.second);
  return out;
}

/// Propagates the band superposition (phi_1(k0) + phi_2(k0))/sqrt 2.
inline CatSplit cat_split(WavepacketSpec spec, const StepSequence& seq, int steps) {
  spec.coin_override = band_superposition(seq, spec.k0, spec.spectral);
  const auto final = evolve_final(make_wavepacket(spec, seq, steps), seq, steps);
  CatSplit out;
  out.marginal = oam_marginal(final);
  out.entropy = coin_walker_entanglement(final);
  for (const auto& [m, prob] : out.marginal) {
    if (m < 0) out.left_mass += prob;
    else if (m > 0) out.right_mass += prob;
    else {
      out.left_mass += 0.5 * prob;
      out.right_mass += 0.5 * prob;
    }
  }
  auto maxima = smoothed_maxima(out.marginal, seq.lattice_spacing());
  if (maxima.size() > 2) maxima.resize(2);
  std::sort(maxima.begin(), maxima.end());
  out.peaks = maxima;
  if (maxima.size() == 2) out.separation = maxima[1] - maxima[0];
  return out;
}

}  // namespace twistwalk
