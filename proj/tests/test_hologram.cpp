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
#include <sstream>

#include "twistwalk/hologram.hpp"

using namespace twistwalk;
using Catch::Matchers::WithinAbs;

namespace {

HologramGrid small_grid(double carrier) {
  HologramGrid g;
  g.width = 96;
  g.height = 80;
  g.pixel_pitch = 20e-6;
  g.carrier = carrier;
  return g;
}

}  // namespace

TEST_CASE("inverse sinc", "[hologram]") {
  CHECK(inverse_sinc(1.0) == 0.0);
  CHECK(inverse_sinc(0.0) == -kPi);
  for (double a : {0.01, 0.2, 0.5, 0.77, 0.999}) {
    const double x = inverse_sinc(a);
    CHECK(x >= -kPi);
    CHECK(x <= 0.0);
    CHECK_THAT(std::sin(x) / x, WithinAbs(a, 1e-9));
  }
  CHECK_THROWS_AS(inverse_sinc(1.1), AmplitudeRangeError);
  CHECK_THROWS_AS(inverse_sinc(-0.1), AmplitudeRangeError);
}

TEST_CASE("uniform fields give flat holograms", "[hologram]") {
  const auto g = small_grid(0.0);
  const auto one = make_hologram(g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  for (double f : one.phase) CHECK_THAT(f, WithinAbs(kPi, 1e-12));
  const auto zero = make_hologram(g, [](double, double) { return 0.0; }, [](double, double) { return 1.3; });
  for (double f : zero.phase) CHECK(f == 0.0);
  CHECK_THROWS_AS(make_hologram(g, [](double, double) { return 1.2; }, [](double, double) { return 0.0; }),
                  AmplitudeRangeError);
}

TEST_CASE("first-order phase round trip", "[hologram]") {
  const auto g = small_grid(1.0 / (6 * 20e-6));
  auto phase = [](double x, double y) { return 3e3 * x - 1e8 * y * y + 0.4; };
  const auto h = make_hologram(g, [](double, double) { return 1.0; }, phase);
  double offset = 0.0;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      const double target = phase(g.x(i), g.y(j)) + blazed_grating(g, g.x(i));
      const double diff = wrap_angle(h.encoded_phase(i, j) - target);
      if (i == 0 && j == 0) offset = diff;
      CHECK(std::abs(wrap_angle(diff - offset)) < 1e-9);
    }
}

TEST_CASE("OAM holograms carry a fork of the right order", "[hologram]") {
  HologramGrid g;
  g.width = 200;
  g.height = 200;
  g.pixel_pitch = 10e-6;
  g.carrier = 1.0 / (10 * 10e-6);
  const Beam beam{0.4e-3, 800e-9};
  for (int m : {3, -2, 1}) {
    const auto h = make_oam_hologram(g, {{m, 1.0}}, beam);
    for (double f : h.phase) {
      CHECK(f >= 0.0);
      CHECK(f < 2.0 * kPi);
    }
    CHECK(fork_order(h, strongest_ring(h)) == m);
  }
  const auto plain = make_oam_hologram(g, {{0, 1.0}}, beam);
  CHECK(fork_order(plain, 20.0) == 0);

  const auto s = make_localized_state(3, PolState::L(), {-5, 5});
  const auto from_state = make_state_hologram(g, s, beam);
  CHECK(fork_order(from_state, strongest_ring(from_state)) == 3);

  SpinOrbitState bell({-2, 2});
  bell.at(Pol::L, 1) = 1.0 / std::sqrt(2.0);
  bell.at(Pol::R, -1) = 1.0 / std::sqrt(2.0);
  CHECK_THROWS_AS(make_state_hologram(g, bell, beam), ValidationError);
  CHECK_THROWS_AS(fork_order(plain, 500.0), ValidationError);
}

TEST_CASE("graymap encoding", "[hologram]") {
  auto g = small_grid(0.0);
  g.width = 4;
  g.height = 2;
  const auto h = make_hologram(g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  std::ostringstream os;
  write_pgm(os, h);
  const std::string out = os.str();
  const std::string header = "P5\n4 2\n255\n";
  REQUIRE(out.size() == header.size() + 8);
  CHECK(out.substr(0, header.size()) == header);
  for (std::size_t k = header.size(); k < out.size(); ++k) CHECK(static_cast<unsigned char>(out[k]) == 128);
}
