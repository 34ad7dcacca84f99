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


#include <catch_amalgamated.hpp>
#include <random>

#include "twistwalk/multiphoton.hpp"

using namespace twistwalk;
using Catch::Matchers::WithinAbs;

namespace {

SingleParticleUnitary haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  SingleParticleUnitary t;
  t.u = q;
  for (int m = 0; m < n; ++m) {
    t.inputs.push_back({PolBasis::LR, 0, m});
    t.outputs.push_back({PolBasis::LR, 0, m});
  }
  return t;
}

/// Two bosons carrying orthogonal ancilla labels: the walk acts as U (x) I on
/// (mode, label); tracing out the label must give the distinguishable model.
Eigen::MatrixXd ancilla_oracle(const SingleParticleUnitary& t, const ModeIndex& in1, const ModeIndex& in2) {
  const auto n = static_cast<Eigen::Index>(t.outputs.size());
  const auto c1 = static_cast<Eigen::Index>(t.input_index(in1));
  const auto c2 = static_cast<Eigen::Index>(t.input_index(in2));
  // Photon 1 in label 0, photon 2 in label 1: the two never share an
  // extended mode, so the permanent has a single surviving term per ordering.
  Eigen::MatrixXd pbar = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      // Extended outputs (p,0) and (q,1) are distinct modes: probability |U_1p U_2q|^2.
      const double prob = std::norm(t.u(p, c1) * t.u(q, c2));
      if (p == q) pbar(p, p) += prob;
      else {
        pbar(std::min(p, q), std::max(p, q)) += prob;
      }
    }
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = p + 1; q < n; ++q) pbar(q, p) = pbar(p, q);
  return pbar;
}

const ModeIndex kL0 = lr_mode(Pol::L, 0);
const ModeIndex kR0 = lr_mode(Pol::R, 0);

}  // namespace

TEST_CASE("lifted walk matrix", "[multiphoton]") {
  const auto seq = StepSequence::wavepacket();
  const OamWindow in{-4, 4};
  const auto id = lift_walk_unitary(seq, 0, in);
  CHECK(id.u.rows() == id.u.cols());
  CHECK((id.u - Eigen::MatrixXcd::Identity(id.u.rows(), id.u.cols())).cwiseAbs().maxCoeff() == 0.0);

  const auto t = lift_walk_unitary(seq, 3, in);
  CHECK(t.unitarity_residual() < 1e-12);
  const auto out_w = lifted_output_window(seq, 3, in);
  const auto direct = evolve_final(make_localized_state(0, PolState::L(), out_w), seq, 3);
  for (int m = out_w.min; m <= out_w.max; ++m) {
    CHECK(t.amplitude(kL0, lr_mode(Pol::L, m)) == direct.amplitude(Pol::L, m));
    CHECK(t.amplitude(kL0, lr_mode(Pol::R, m)) == direct.amplitude(Pol::R, m));
  }

  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    SpinOrbitState s(out_w);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(t.inputs.size()));
    double norm = 0.0;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = cplx(g(rng), g(rng));
      norm += std::norm(v(static_cast<Eigen::Index>(i)));
    }
    v /= std::sqrt(norm);
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
      s.at(static_cast<Pol>(t.inputs[i].pol), t.inputs[i].m) = v(static_cast<Eigen::Index>(i));
    const auto evolved = evolve_final(s, seq, 3);
    const Eigen::VectorXcd w = t.u * v;
    for (std::size_t i = 0; i < t.outputs.size(); ++i)
      CHECK(std::abs(w(static_cast<Eigen::Index>(i)) -
                     evolved.amplitude(static_cast<Pol>(t.outputs[i].pol), t.outputs[i].m)) < 1e-12);
  }

  const auto hv = lift_walk_unitary(seq, 3, in, PolBasis::HV);
  CHECK(hv.unitarity_residual() < 1e-12);
  CHECK(hv.outputs.front().basis == PolBasis::HV);
  CHECK_THROWS_AS(t.input_index(lr_mode(Pol::L, 9)), ValidationError);
}

TEST_CASE("identity transfer keeps the photons in place", "[multiphoton]") {
  const auto t = lift_walk_unitary(StepSequence::wavepacket(), 0, {-1, 1});
  const auto ipt = ipt_joint(t, kL0, kR0);
  const auto dpt = dpt_joint(t, kL0, kR0);
  for (const auto& d : {ipt, dpt}) {
    CHECK_THAT(d.at(kL0, kR0), WithinAbs(0.25, 1e-15));
    CHECK_THAT(d.at(kR0, kL0), WithinAbs(0.25, 1e-15));
    CHECK_THAT(d.coincidence_total(), WithinAbs(0.5, 1e-15));
    CHECK(d.coincidence.size() == 2);
  }
}

TEST_CASE("Hong-Ou-Mandel dip", "[multiphoton]") {
  const auto mixer = balanced_mixer(kL0, kR0);
  CHECK(mixer.unitarity_residual() < 1e-15);
  const auto ipt = ipt_joint(mixer, kL0, kR0);
  const auto dpt = dpt_joint(mixer, kL0, kR0);
  CHECK(std::abs(ipt.mode_coincidence()) < 1e-12);
  CHECK_THAT(dpt.mode_coincidence(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(ipt.before_splitter(0, 0), WithinAbs(0.5, 1e-15));
  const auto half = joint_distribution(mixer, kL0, kR0, 0.5);
  CHECK_THAT(half.mode_coincidence(), WithinAbs(0.25, 1e-15));
  CHECK_THROWS_AS(joint_distribution(mixer, kL0, kR0, 1.5), ValidationError);
}

TEST_CASE("three-step two-photon walk", "[multiphoton]") {
  const auto seq = StepSequence::wavepacket(kPi);
  const auto t = lift_walk_unitary(seq, 3, {0, 0});
  const auto ipt = ipt_joint(t, kL0, kR0);
  const auto dpt = dpt_joint(t, kL0, kR0);

  for (const auto& [pair, prob] : ipt.coincidence) {
    if (pair.first.m % 2 == 0 || pair.second.m % 2 == 0) CHECK(prob < 1e-14);
    CHECK(prob == ipt.at(pair.second, pair.first));
  }
  CHECK_THAT(ipt.coincidence_total() + ipt.same_port_total(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(dpt.coincidence_total() + dpt.same_port_total(), WithinAbs(1.0, 1e-10));
  CHECK_THAT(ipt.coincidence_total(), WithinAbs(0.5, 1e-12));

  const auto modes = outcome_modes({&ipt, &dpt});
  const auto scan = inequality_scan(ipt.coincidence, modes, Inequality::Photon);
  REQUIRE(!scan.empty());
  // Frozen from an independent dense permanent computation.
  CHECK_THAT(scan.front().T, WithinAbs(1.0 / 64.0, 1e-12));
  CHECK(scan.front().p == lr_mode(Pol::L, 1));
  CHECK(scan.front().q == lr_mode(Pol::R, -1));
  CHECK(std::count_if(scan.begin(), scan.end(), [](const auto& x) { return x.T > 1e-12; }) == 4);
  CHECK_THAT(inequality_scan(ipt.coincidence, modes, Inequality::Classical).front().T, WithinAbs(1.0 / 192.0, 1e-12));
  for (const auto& term : inequality_scan(dpt.coincidence, modes, Inequality::Photon)) CHECK(term.T <= 1e-15);
  CHECK_THAT(tvd(ipt.coincidence, dpt.coincidence), WithinAbs(0.125, 1e-12));

  const auto thv = lift_walk_unitary(seq, 3, {0, 0}, PolBasis::HV);
  const auto ihv = ipt_joint(thv, kL0, kR0);
  const auto dhv = dpt_joint(thv, kL0, kR0);
  const auto hv_modes = outcome_modes({&ihv, &dhv});
  const auto hv_scan = inequality_scan(ihv.coincidence, hv_modes, Inequality::Photon);
  CHECK_THAT(hv_scan.front().T, WithinAbs(1.0 / 128.0, 1e-12));
  CHECK(std::count_if(hv_scan.begin(), hv_scan.end(), [](const auto& x) { return x.T > 1e-12; }) == 15);
  CHECK_THAT(tvd(ihv.coincidence, dhv.coincidence), WithinAbs(9.0 / 32.0, 1e-12));
}

TEST_CASE("distinguishable photons through an ancilla label", "[multiphoton]") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = haar_unitary(6, rng);
    const auto a = t.inputs[1], b = t.inputs[4];
    const auto dpt = dpt_joint(t, a, b);
    CHECK((dpt.before_splitter - ancilla_oracle(t, a, b)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("random unitaries: symmetry, normalization and the photon bound", "[multiphoton]") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = haar_unitary(5, rng);
    CHECK(t.unitarity_residual() < 1e-12);
    const auto in1 = t.inputs[0], in2 = t.inputs[2];
    const auto ipt = ipt_joint(t, in1, in2);
    const auto dpt = dpt_joint(t, in1, in2);
    for (const auto& [pair, prob] : ipt.coincidence) CHECK(prob == ipt.at(pair.second, pair.first));
    for (const auto* d : {&ipt, &dpt}) {
      CHECK_THAT(d->coincidence_total() + d->same_port_total(), WithinAbs(1.0, 1e-10));
      CHECK_THAT(d->before_splitter.sum() - 0.5 * (d->before_splitter.sum() - d->before_splitter.trace()),
                 WithinAbs(1.0, 1e-10));
    }
    for (const auto& term : inequality_scan(dpt.coincidence, t.outputs, Inequality::Photon))
      CHECK(term.T <= 1e-15);
    // Doubly occupied input mode.
    const auto twin = ipt_joint(t, in1, in1);
    CHECK_THAT(twin.coincidence_total() + twin.same_port_total(), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("inequality terms", "[multiphoton]") {
  const ModeIndex a = kL0, b = kR0;
  ProbDist<ModePair> none(ProbDist<ModePair>::map_type{{{a, b}, 0.3}, {{b, a}, 0.1}}, true);
  CHECK_THAT(photon_inequality_T(none, a, b), WithinAbs(-0.2, 1e-15));
  CHECK_THAT(classical_inequality_T(none, a, b), WithinAbs(-0.2, 1e-15));
  ProbDist<ModePair> bunched(ProbDist<ModePair>::map_type{{{a, a}, 0.2}, {{b, b}, 0.2}, {{a, b}, 0.05}}, true);
  CHECK_THAT(photon_inequality_T(bunched, a, b), WithinAbs(0.2 - 0.025, 1e-15));
  CHECK_THAT(classical_inequality_T(bunched, a, b), WithinAbs(0.2 / 3.0 - 0.025, 1e-15));
}

TEST_CASE("Poisson significance", "[multiphoton]") {
  const ModeIndex a = kL0, b = kR0;
  CountRecord<ModePair> rec;
  rec.counts = {{{a, a}, 40}, {{b, b}, 90}, {{a, b}, 10}, {{b, a}, 14}};
  rec.shots = 1000;
  const auto s = term_significance(rec, a, b, Inequality::Photon);
  // f = 60 - 12 = 48; var = (40 + 90)/4 + 24/4 = 38.5
  CHECK_THAT(s.significance, WithinAbs(48.0 / std::sqrt(38.5), 1e-12));
  CHECK_THAT(s.T, WithinAbs(48.0 / 154.0, 1e-12));

  CountRecord<ModePair> big = rec;
  for (auto& [k, n] : big.counts) n *= 100;
  CHECK_THAT(term_significance(big, a, b, Inequality::Photon).significance, WithinAbs(10.0 * s.significance, 1e-9));
  CHECK_THAT(term_significance(big, a, b, Inequality::Classical).significance,
             WithinAbs(10.0 * term_significance(rec, a, b, Inequality::Classical).significance, 1e-9));

  CountRecord<ModePair> tie;
  tie.counts = {{{a, a}, 4}, {{b, b}, 9}, {{a, b}, 6}, {{b, a}, 6}};
  CHECK(term_significance(tie, a, b, Inequality::Photon).significance == 0.0);

  CountRecord<ModePair> other;
  other.counts = {{{a, a}, 5}};
  CHECK_THROWS_AS(term_significance(other, lr_mode(Pol::L, 3), lr_mode(Pol::R, 3), Inequality::Photon),
                  ZeroCountError);
  CHECK_THROWS_AS(violation_significance(CountRecord<ModePair>{}, Inequality::Photon), ZeroCountError);
}

TEST_CASE("synthetic counts resolve the two-photon violation", "[multiphoton]") {
  const auto t = lift_walk_unitary(StepSequence::wavepacket(kPi), 3, {0, 0});
  const auto ipt = ipt_joint(t, kL0, kR0);
  const auto top = inequality_scan(ipt.coincidence, outcome_modes({&ipt}), Inequality::Photon).front();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto rec = sample_counts(ipt.coincidence, 10000, seed);
    const auto sig = term_significance(rec, top.p, top.q, Inequality::Photon);
    CHECK(sig.significance > 3.0);
    const auto all = violation_significance(rec, Inequality::Photon);
    CHECK(std::any_of(all.begin(), all.end(), [](const auto& x) { return x.significance > 3.0; }));
  }
}
