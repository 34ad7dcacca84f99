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

#include "twistwalk/spectral.hpp"

using namespace twistwalk;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> uniform_k(int n) {
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) k[static_cast<std::size_t>(j)] = -kPi + 2.0 * kPi * (j + 0.5) / n;
  return k;
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST_CASE("Bloch operator basics", "[spectral]") {
  const auto flat = StepSequence::standard_paper(0.0);
  const Mat2 u0 = bloch_operator(flat, 0.0).physical;
  for (double k : {-2.0, 0.5, 3.0}) CHECK(bloch_operator(flat, k).physical.max_abs_diff(u0) < 1e-15);

  const auto seq = StepSequence::standard_paper(1.2);
  Mat2 coins = Mat2::identity();
  for (const auto& el : seq.elements()) {
    if (const auto* wp = std::get_if<WavePlate>(&el)) coins = wp->matrix() * coins;
    else {
      const auto& qp = std::get<QPlate>(el);
      const double c = std::cos(qp.retardance / 2), s = std::sin(qp.retardance / 2);
      coins = Mat2{c, cplx(0, -s), cplx(0, -s), c} * coins;
    }
  }
  CHECK(bloch_operator(seq, 0.0).physical.max_abs_diff(coins) < 1e-15);

  for (double k : uniform_k(50)) {
    const auto b = bloch_operator(seq, k);
    CHECK(b.physical.unitarity_residual() < 1e-12);
    CHECK(std::abs(std::abs(b.physical.det()) - 1.0) < 1e-12);
    CHECK(bloch_operator(seq, k + 2 * kPi).physical.max_abs_diff(b.physical) < 1e-12);
  }
}

TEST_CASE("eigenphases follow the closed-form dispersion", "[spectral]") {
  const auto seq = StepSequence::wavepacket(kPi);
  REQUIRE(has_closed_form_dispersion(seq));
  std::vector<double> grid(1001);
  for (int j = 0; j < 1001; ++j) grid[static_cast<std::size_t>(j)] = -kPi + 2.0 * kPi * (j + 0.5) / 1001;
  const auto bs = dispersion(seq, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto cf = closed_form_quasi_energies(grid[i]);
    worst = std::max({worst, angle_diff(bs.omega[0][i], cf[0]), angle_diff(bs.omega[1][i], cf[1])});
  }
  CHECK(worst < 1e-10);
  const auto zero = band_point(seq, 0.0);
  CHECK_THAT(zero.omega[1], WithinAbs(0.0, 1e-14));
  CHECK_THAT(std::abs(zero.omega[0]), WithinAbs(kPi, 1e-14));
  CHECK_THAT(band_point(seq, kPi / 2).omega[1], WithinAbs(kPi / 4, 1e-12));
}

TEST_CASE("eigenpairs are consistent with the Bloch operator", "[spectral]") {
  for (const auto& seq : {StepSequence::wavepacket(kPi), StepSequence::wavepacket(1.57),
                          StepSequence::standard_paper(kPi), StepSequence::standard_paper(1.57)}) {
    const auto grid = uniform_k(400);
    const auto bs = dispersion(seq, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Mat2 u = bloch_operator(seq, grid[i]).matrix();
      CHECK(u.unitarity_residual() < 1e-12);
      for (int b = 0; b < 2; ++b) {
        const PolState v = bs.states[b][i];
        const PolState uv = u * v;
        const cplx lam = std::polar(1.0, -bs.omega[b][i]);
        worst = std::max({worst, std::abs(uv.left - lam * v.left), std::abs(uv.right - lam * v.right)});
        CHECK(std::abs(v.norm_sq() - 1.0) < 1e-12);
        CHECK(v.left.imag() == 0.0);
        CHECK(v.left.real() >= 0.0);
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("bands are gapped and labelled continuously", "[spectral]") {
  const auto seq = StepSequence::wavepacket(kPi);
  const auto bs = dispersion(seq, uniform_k(2000));
  double gap = 10.0;
  for (std::size_t i = 0; i < bs.size(); ++i) gap = std::min(gap, angle_diff(bs.omega[0][i], bs.omega[1][i]));
  CHECK(gap > 1.0);
  for (std::size_t i = 1; i < bs.size(); ++i)
    for (int b = 0; b < 2; ++b) CHECK(angle_diff(bs.omega[b][i], bs.omega[b][i - 1]) < 0.01);
}

TEST_CASE("degenerate bands are reported", "[spectral]") {
  const StepSequence identity({WavePlate{0.0, 0.0}});
  CHECK_THROWS_AS(dispersion(identity, uniform_k(8)), DegenerateBandError);
  CHECK_THROWS_AS(group_velocity(identity, 0.3), DegenerateBandError);
}

TEST_CASE("grid validation", "[spectral]") {
  const auto seq = StepSequence::wavepacket();
  CHECK_THROWS_AS(dispersion(seq, {}), ValidationError);
  CHECK_THROWS_AS(dispersion(seq, {0.5, 0.1}), ValidationError);
  CHECK_THROWS_AS(dispersion(seq, {-4.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(brillouin_grid(1), ValidationError);
}

TEST_CASE("group velocity", "[spectral]") {
  const auto seq = StepSequence::wavepacket(kPi);
  for (double k : {kPi / 2, -kPi / 2}) {
    const auto v = group_velocity(seq, k);
    CHECK(std::abs(v[0]) < 1e-9);
    CHECK(std::abs(v[1]) < 1e-9);
  }
  CHECK_THAT(group_velocity(seq, 0.0)[1], WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
  double vmax = 0.0;
  for (double k : uniform_k(1001)) {
    const auto v = group_velocity(seq, k);
    vmax = std::max(vmax, std::abs(v[1]));
    CHECK(std::abs(v[0] + v[1]) < 1e-9);
    const auto fd = group_velocity(seq, k, {}, VelocityMethod::FiniteDifference);
    CHECK(std::abs(fd[0] - v[0]) < 1e-6);
    CHECK(std::abs(fd[1] - v[1]) < 1e-6);
  }
  CHECK(vmax <= 1.0 / std::sqrt(2.0) + 1e-12);
  CHECK(std::abs(std::max(vmax, std::abs(group_velocity(seq, 0.0)[1])) - 1.0 / std::sqrt(2.0)) < 1e-6);

  SpectralOptions mirror;
  mirror.mirror = true;
  CHECK_THAT(group_velocity(seq, 0.0, mirror)[1], WithinAbs(-1.0 / std::sqrt(2.0), 1e-12));
  CHECK_THROWS_AS(group_velocity(StepSequence::standard_paper(), 0.1, {}, VelocityMethod::ClosedForm),
                  ValidationError);
  const auto hybrid = group_velocity(StepSequence::wavepacket(1.57), 0.4);
  CHECK(std::isfinite(hybrid[0]));
}

TEST_CASE("coin eigenstates lie on a great circle with unit winding", "[spectral]") {
  const auto seq = StepSequence::wavepacket(kPi);
  const auto circle = eigenstate_circle(seq, brillouin_grid(4096));
  CHECK(circle.residual < 1e-8);
  for (const auto& p : circle.points) CHECK_THAT(p[0] * p[0] + p[1] * p[1] + p[2] * p[2], WithinAbs(1.0, 1e-12));
  const auto w = winding_number(seq);
  CHECK(w.value == 1);
  CHECK(std::abs(w.raw - 1.0) < 1e-6);
  CHECK(winding_number(seq, 512).value == w.value);
  CHECK(winding_number(StepSequence::wavepacket(0.0)).value == 0);
  CHECK(winding_number(StepSequence::standard_paper(kPi)).value == winding_number(StepSequence::standard_paper(kPi), 512).value);
}

TEST_CASE("broken chiral symmetry is detected", "[spectral]") {
  const StepSequence skew({WavePlate{0.7, 0.2}, QPlate{0.5, 2.0, 0.3}, WavePlate{1.9, -0.4}});
  CHECK_THROWS_AS(eigenstate_circle(skew, brillouin_grid(256)), NotPlanarError);
  CHECK_THROWS_AS(winding_number(StepSequence::standard_paper(1.57)), NotPlanarError);
}
