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

#include "twistwalk/metrics.hpp"

using namespace twistwalk;
using Catch::Matchers::WithinAbs;

namespace {

ProbDist<int> dist(std::initializer_list<std::pair<const int, double>> init) {
  return ProbDist<int>(ProbDist<int>::map_type(init));
}

ProbDist<int> random_dist(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbDist<int>::map_type m;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += m[i] = u(rng) * (u(rng) < 0.3 ? 0.0 : 1.0) + 1e-3;
  for (auto& [k, v] : m) v /= sum;
  return ProbDist<int>(m);
}

}  // namespace

TEST_CASE("similarity identities", "[metrics]") {
  const auto p = dist({{0, 0.2}, {1, 0.3}, {2, 0.5}});
  CHECK_THAT(similarity(p, p), WithinAbs(1.0, 1e-15));
  CHECK(similarity(dist({{0, 1.0}}), dist({{1, 1.0}})) == 0.0);
  // (sqrt(0.5 * 1.0))^2 = 0.5
  CHECK_THAT(similarity(dist({{0, 0.5}, {1, 0.5}}), dist({{0, 1.0}})), WithinAbs(0.5, 1e-15));
}

TEST_CASE("total variation distance identities", "[metrics]") {
  const auto p = dist({{0, 0.75}, {1, 0.25}});
  CHECK(tvd(p, p) == 0.0);
  CHECK(tvd(dist({{0, 1.0}}), dist({{1, 1.0}})) == 1.0);
  CHECK_THAT(tvd(p, dist({{0, 0.5}, {1, 0.5}})), WithinAbs(0.25, 1e-15));
}

TEST_CASE("empty distributions are rejected", "[metrics]") {
  const ProbDist<int> empty(ProbDist<int>::map_type{}, true);
  CHECK_THROWS_AS(similarity(empty, dist({{0, 1.0}})), EmptyDistributionError);
  CHECK_THROWS_AS(tvd(dist({{0, 1.0}}), empty), EmptyDistributionError);
  CHECK_THROWS_AS(dist({{0, 0.4}}), ValidationError);
  CHECK_THROWS_AS(dist({{0, -0.1}, {1, 1.1}}), ValidationError);
}

TEST_CASE("sub-normalized inputs compare after joint renormalization", "[metrics]") {
  const ProbDist<int> half(ProbDist<int>::map_type{{0, 0.25}, {1, 0.25}}, true);
  const auto full = dist({{0, 0.5}, {1, 0.5}});
  CHECK_THAT(similarity(half, full), WithinAbs(1.0, 1e-15));
  CHECK_THAT(tvd(half, full), WithinAbs(0.0, 1e-15));
}

TEST_CASE("metric properties on random distributions", "[metrics]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_dist(rng, 12);
    const auto q = random_dist(rng, 12);
    const auto r = random_dist(rng, 12);
    CHECK(tvd(p, r) <= tvd(p, q) + tvd(q, r) + 1e-15);
    CHECK_THAT(similarity(p, q), WithinAbs(similarity(q, p), 1e-15));
    const double s = similarity(p, q);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    // Relabeling every outcome the same way leaves S unchanged.
    ProbDist<int>::map_type pm, qm;
    for (const auto& [k, v] : p) pm[100 - 3 * k] = v;
    for (const auto& [k, v] : q) qm[100 - 3 * k] = v;
    CHECK_THAT(similarity(ProbDist<int>(pm), ProbDist<int>(qm)), WithinAbs(s, 1e-14));
  }
  const auto p = random_dist(rng, 9);
  CHECK(similarity(p, p) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(tvd(p, p) < 1e-6);
}

TEST_CASE("sampling follows the distribution", "[metrics]") {
  SECTION("delta distribution") {
    const auto rec = sample_counts(dist({{3, 1.0}}), 1000, 1);
    CHECK(rec[3] == 1000);
    CHECK(rec.shots == 1000);
  }
  SECTION("fixed seed is reproducible") {
    const auto p = dist({{0, 0.1}, {1, 0.2}, {2, 0.3}, {3, 0.4}});
    CHECK(sample_counts(p, 5000, 42).counts == sample_counts(p, 5000, 42).counts);
    CHECK(sample_counts(p, 5000, 42).counts != sample_counts(p, 5000, 43).counts);
  }
  SECTION("empirical frequencies within 5 sigma") {
    const auto p = dist({{-2, 0.05}, {-1, 0.15}, {0, 0.4}, {1, 0.3}, {2, 0.1}});
    const std::uint64_t shots = 100000;
    const auto rec = sample_counts(p, shots, 2024);
    CHECK(rec.recorded() == shots);
    for (const auto& [k, prob] : p) {
      const double expected = prob * shots;
      const double sigma = std::sqrt(shots * prob * (1 - prob));
      CHECK(std::abs(static_cast<double>(rec[k]) - expected) < 5 * sigma);
    }
    const auto sigma = poisson_sigma(rec);
    CHECK(sigma.at(0) == std::sqrt(static_cast<double>(rec[0])));
  }
  SECTION("sub-normalized mass is left unrecorded") {
    const ProbDist<int> half(ProbDist<int>::map_type{{0, 0.25}, {1, 0.25}}, true);
    const auto rec = sample_counts(half, 40000, 3);
    CHECK(rec.recorded() < rec.shots);
    CHECK(std::abs(static_cast<double>(rec.recorded()) - 20000.0) < 5 * 100.0);
  }
  CHECK_THROWS_AS(sample_counts(dist({{0, 1.0}}), 0, 1), ValidationError);
}

TEST_CASE("derived seeds differ per task", "[metrics]") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}
