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

// Two-photon walks. The single-particle walk is lifted to a dense transfer
// matrix; two-boson output probabilities follow from 2x2 permanents, and a
// balanced beam splitter after the walk routes the photons to two detectors.
//
// Beam splitter: t = 1/sqrt2, r = i/sqrt2 on a path label appended to every
// mode. Both photons enter the splitter through the same port, so a
// coincidence (one photon per output port) has probability
//   P(p, q) = Pbar(p, q) / 4   for p != q  (p in port A, q in port B)
//   P(p, p) = Pbar(p, p) / 2
// where Pbar is the joint probability before the splitter. Coincidences carry
// half of the total probability.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"

namespace twistwalk {

enum class PolBasis : int { LR = 0, HV = 1 };

inline std::string_view basis_name(PolBasis b) { return b == PolBasis::LR ? "LR" : "HV"; }

inline PolBasis parse_basis(std::string_view s) {
  if (s == "LR") return PolBasis::LR;
  if (s == "HV") return PolBasis::HV;
  throw ValidationError("unknown polarization basis '" + std::string(s) + "' (expected LR or HV)");
}

struct ModeIndex {
  PolBasis basis = PolBasis::LR;
  int pol = 0;  // 0 -> L or H, 1 -> R or V
  int m = 0;

  auto operator<=>(const ModeIndex&) const = default;

  std::string_view pol_label() const {
    static constexpr std::string_view names[2][2] = {{"L", "R"}, {"H", "V"}};
    return names[static_cast<int>(basis)][pol];
  }
};

inline ModeIndex lr_mode(Pol p, int m) { return {PolBasis::LR, static_cast<int>(p), m}; }

using ModePair = std::pair<ModeIndex, ModeIndex>;

/// Transfer matrix: U(out, in) is the amplitude for input mode `in` to exit in `out`.
struct SingleParticleUnitary {
  Eigen::MatrixXcd u;
  std::vector<ModeIndex> inputs;
  std::vector<ModeIndex> outputs;

  std::size_t input_index(const ModeIndex& mode) const { return find(inputs, mode, "input"); }
  std::size_t output_index(const ModeIndex& mode) const { return find(outputs, mode, "output"); }
  cplx amplitude(const ModeIndex& in, const ModeIndex& out) const {
    return u(static_cast<Eigen::Index>(output_index(out)), static_cast<Eigen::Index>(input_index(in)));
  }

  /// max |U^dag U - I|; columns are orthonormal for an isometry.
  double unitarity_residual() const {
    const Eigen::MatrixXcd g = u.adjoint() * u;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  }

 private:
  static std::size_t find(const std::vector<ModeIndex>& v, const ModeIndex& mode, const char* what) {
    const auto it = std::lower_bound(v.begin(), v.end(), mode);
    if (it == v.end() || *it != mode)
      throw ValidationError(std::string("mode ") + std::string(mode.pol_label()) + std::to_string(mode.m) +
                            " is not an " + what + " mode");
    return static_cast<std::size_t>(it - v.begin());
  }
};

/// Output window used by lift_walk_unitary for an input window and n steps.
inline OamWindow lifted_output_window(const StepSequence& seq, int steps, OamWindow input) {
  const int grow = steps * seq.max_displacement() + (steps > 0 ? 1 : 0);
  return {input.min - grow, input.max + grow};
}

/// Dense n-step transfer matrix. Inputs are the L/R modes of `input_window`;
/// outputs span the window grown so that no column reaches an edge, and are
/// labelled in `output_basis`.
inline SingleParticleUnitary lift_walk_unitary(const StepSequence& seq, int steps, OamWindow input_window,
                                               PolBasis output_basis = PolBasis::LR) {
  if (steps < 0) throw ValidationError("number of steps must be nonnegative");
  if (input_window.max < input_window.min) throw WindowError("empty OAM window");
  const OamWindow out_w = lifted_output_window(seq, steps, input_window);
  SingleParticleUnitary t;
  for (int pol = 0; pol < 2; ++pol) {
    for (int m = input_window.min; m <= input_window.max; ++m) t.inputs.push_back({PolBasis::LR, pol, m});
    for (int m = out_w.min; m <= out_w.max; ++m) t.outputs.push_back({output_basis, pol, m});
  }
  const auto width = static_cast<Eigen::Index>(out_w.size());
  t.u = Eigen::MatrixXcd::Zero(2 * width, static_cast<Eigen::Index>(t.inputs.size()));
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t col = 0; col < t.inputs.size(); ++col) {
    const ModeIndex& in = t.inputs[col];
    SpinOrbitState s(out_w);
    s.at(static_cast<Pol>(in.pol), in.m) = 1.0;
    if (steps > 0) s = evolve_final(std::move(s), seq, steps);
    const auto c = static_cast<Eigen::Index>(col);
    for (Eigen::Index i = 0; i < width; ++i) {
      const cplx l = s.component(Pol::L)[static_cast<std::size_t>(i)];
      const cplx rr = s.component(Pol::R)[static_cast<std::size_t>(i)];
      if (output_basis == PolBasis::LR) {
        t.u(i, c) = l;
        t.u(width + i, c) = rr;
      } else {
        t.u(i, c) = r * (l + rr);
        t.u(width + i, c) = cplx(0.0, r) * (l - rr);
      }
    }
  }
  return t;
}

/// Balanced mixer of two modes: |a> -> (|a> + i|b>)/sqrt2, |b> -> (i|a> + |b>)/sqrt2.
inline SingleParticleUnitary balanced_mixer(ModeIndex a, ModeIndex b) {
  if (!(a < b)) std::swap(a, b);
  if (a == b) throw ValidationError("mixer needs two distinct modes");
  SingleParticleUnitary t;
  t.inputs = {a, b};
  t.outputs = {a, b};
  const double r = 1.0 / std::sqrt(2.0);
  t.u.resize(2, 2);
  t.u << r, cplx(0, r), cplx(0, r), r;
  return t;
}

struct JointDistribution {
  std::vector<ModeIndex> modes;        // output modes
  Eigen::MatrixXd before_splitter;     // Pbar, symmetric; (p, q) and (q, p) both hold the unordered value
  ProbDist<ModePair> coincidence;      // ordered (port A, port B), sums to 1/2

  std::size_t size() const { return modes.size(); }

  double at(const ModeIndex& p, const ModeIndex& q) const { return coincidence[{p, q}]; }

  /// Probability that the two photons leave the walk in different modes.
  double mode_coincidence() const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < before_splitter.rows(); ++i)
      for (Eigen::Index j = i + 1; j < before_splitter.cols(); ++j) sum += before_splitter(i, j);
    return sum;
  }

  double coincidence_total() const { return coincidence.total(); }

  /// Probability that both photons exit the splitter through the same port.
  double same_port_total() const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < before_splitter.rows(); ++i) {
      sum += 0.5 * before_splitter(i, i);
      for (Eigen::Index j = i + 1; j < before_splitter.cols(); ++j) sum += 0.5 * before_splitter(i, j);
    }
    return sum;
  }
};

inline constexpr double kOutcomeThreshold = 1e-12;

/// Two-photon joint distribution for photons in modes in1, in2 with
/// indistinguishability x = |<a|b>|^2 of their internal states
/// (x = 1: indistinguishable, x = 0: distinguishable).
inline JointDistribution joint_distribution(const SingleParticleUnitary& t, const ModeIndex& in1,
                                            const ModeIndex& in2, double indistinguishability) {
  const double x = indistinguishability;
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("indistinguishability must lie in [0, 1]");
  const auto c1 = static_cast<Eigen::Index>(t.input_index(in1));
  const auto c2 = static_cast<Eigen::Index>(t.input_index(in2));
  const bool same = c1 == c2;
  const auto n = static_cast<Eigen::Index>(t.outputs.size());

  JointDistribution d;
  d.modes = t.outputs;
  d.before_splitter = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const cplx u1p = t.u(p, c1);
    const cplx u2p = t.u(p, c2);
    const double pp = std::norm(u1p * u2p) * (1.0 + x) / (same ? 1.0 + x : 1.0);
    d.before_splitter(p, p) = pp;
    for (Eigen::Index q = p + 1; q < n; ++q) {
      const cplx a = u1p * t.u(q, c2);
      const cplx b = t.u(q, c1) * u2p;
      double pq = std::norm(a) + std::norm(b) + 2.0 * x * (a * std::conj(b)).real();
      if (same) pq /= 1.0 + x;
      pq = std::max(pq, 0.0);
      d.before_splitter(p, q) = pq;
      d.before_splitter(q, p) = pq;
    }
  }

  ProbDist<ModePair>::map_type coinc;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      const double v = p == q ? 0.5 * d.before_splitter(p, p) : 0.25 * d.before_splitter(p, q);
      if (v > 0.0) coinc.emplace(ModePair{d.modes[static_cast<std::size_t>(p)], d.modes[static_cast<std::size_t>(q)]}, v);
    }
  d.coincidence = ProbDist<ModePair>(std::move(coinc), true);
  return d;
}

inline JointDistribution ipt_joint(const SingleParticleUnitary& t, const ModeIndex& in1, const ModeIndex& in2) {
  return joint_distribution(t, in1, in2, 1.0);
}

inline JointDistribution dpt_joint(const SingleParticleUnitary& t, const ModeIndex& in1, const ModeIndex& in2) {
  return joint_distribution(t, in1, in2, 0.0);
}

enum class Inequality { Classical, Photon };

inline std::string_view inequality_name(Inequality w) { return w == Inequality::Classical ? "classical" : "photon"; }

inline Inequality parse_inequality(std::string_view s) {
  if (s == "classical") return Inequality::Classical;
  if (s == "photon") return Inequality::Photon;
  throw ValidationError("unknown inequality '" + std::string(s) + "' (expected classical or photon)");
}

/// Prefactor c in T = c sqrt(P_pp P_qq) - P_pq.
inline double inequality_prefactor(Inequality w) { return w == Inequality::Classical ? 1.0 / 3.0 : 1.0; }

namespace detail {

/// Symmetrized off-diagonal coincidence probability.
inline double symmetric_pq(const ProbDist<ModePair>& p, const ModeIndex& a, const ModeIndex& b) {
  return 0.5 * (p[{a, b}] + p[{b, a}]);
}

}  // namespace detail

/// T = (1/3) sqrt(P_pp P_qq) - P_pq; positive values violate the classical bound.
inline double classical_inequality_T(const ProbDist<ModePair>& p, const ModeIndex& a, const ModeIndex& b) {
  return std::sqrt(p[{a, a}] * p[{b, b}]) / 3.0 - detail::symmetric_pq(p, a, b);
}

/// T = sqrt(P_pp P_qq) - P_pq; positive values violate the distinguishable-photon bound.
inline double photon_inequality_T(const ProbDist<ModePair>& p, const ModeIndex& a, const ModeIndex& b) {
  return std::sqrt(p[{a, a}] * p[{b, b}]) - detail::symmetric_pq(p, a, b);
}

inline double inequality_T(Inequality w, const ProbDist<ModePair>& p, const ModeIndex& a, const ModeIndex& b) {
  return w == Inequality::Classical ? classical_inequality_T(p, a, b) : photon_inequality_T(p, a, b);
}

/// Output modes that carry more than kOutcomeThreshold in any coincidence
/// outcome of any of the given distributions.
inline std::vector<ModeIndex> outcome_modes(const std::vector<const JointDistribution*>& dists) {
  std::vector<ModeIndex> out;
  for (const auto* d : dists)
    for (const auto& [pair, prob] : d->coincidence)
      if (prob > kOutcomeThreshold) {
        out.push_back(pair.first);
        out.push_back(pair.second);
      }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct InequalityTerm {
  ModeIndex p;
  ModeIndex q;
  double T;
};

/// T over all unordered pairs p < q of `modes`, largest first (ties keep mode order).
inline std::vector<InequalityTerm> inequality_scan(const ProbDist<ModePair>& dist, const std::vector<ModeIndex>& modes,
                                                   Inequality which) {
  std::vector<InequalityTerm> out;
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      out.push_back({modes[i], modes[j], inequality_T(which, dist, modes[i], modes[j])});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.T > b.T; });
  return out;
}

struct TermSignificance {
  ModeIndex p;
  ModeIndex q;
  double T = 0.0;      // on count-normalized probabilities
  double sigma = 0.0;  // first-order Poisson error of T
  double significance = 0.0;
};

/// Violation of one term in Poisson standard deviations. With
/// f = c sqrt(N_pp N_qq) - (N_pq + N_qp)/2 the first-order variance is
/// c^2 (N_pp + N_qq)/4 + (N_pq + N_qp)/4.
inline TermSignificance term_significance(const CountRecord<ModePair>& counts, const ModeIndex& p,
                                          const ModeIndex& q, Inequality which) {
  const double c = inequality_prefactor(which);
  const double npp = static_cast<double>(counts[{p, p}]);
  const double nqq = static_cast<double>(counts[{q, q}]);
  const double cross = static_cast<double>(counts[{p, q}]) + static_cast<double>(counts[{q, p}]);
  if (npp + nqq + cross == 0.0)
    throw ZeroCountError("no counts enter the term (" + std::string(p.pol_label()) + std::to_string(p.m) + ", " +
                         std::string(q.pol_label()) + std::to_string(q.m) + ")");
  const double total = static_cast<double>(counts.recorded());
  const double f = c * std::sqrt(npp * nqq) - 0.5 * cross;
  const double sigma_f = std::sqrt(c * c * (npp + nqq) / 4.0 + cross / 4.0);
  TermSignificance out{p, q, f / total, sigma_f / total, 0.0};
  out.significance = f == 0.0 ? 0.0 : f / sigma_f;
  return out;
}

/// Significance of every pair p < q drawn from the recorded modes whose
/// entering counts are not all zero.
inline std::vector<TermSignificance> violation_significance(const CountRecord<ModePair>& counts, Inequality which) {
  if (counts.recorded() == 0) throw ZeroCountError("empty count record");
  std::vector<ModeIndex> modes;
  for (const auto& [pair, n] : counts.counts) {
    modes.push_back(pair.first);
    modes.push_back(pair.second);
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  std::vector<TermSignificance> out;
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      const auto& p = modes[i];
      const auto& q = modes[j];
      if (counts[{p, p}] + counts[{q, q}] + counts[{p, q}] + counts[{q, p}] == 0) continue;
      out.push_back(term_significance(counts, p, q, which));
    }
  return out;
}

}  // namespace twistwalk
