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

// Distribution comparison (similarity, total variation distance) and
// synthetic counting statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string_view>
#include <utility>

#include "twistwalk/errors.hpp"

namespace twistwalk {

/// Probability distribution over arbitrary ordered keys. Missing keys read
/// as zero. A sub-normalized distribution (post-splitter coincidences) may
/// sum to less than one.
template <class Key>
class ProbDist {
 public:
  using map_type = std::map<Key, double>;

  ProbDist() = default;

  explicit ProbDist(map_type probs, bool subnormalized = false)
      : probs_(std::move(probs)), subnormalized_(subnormalized) {
    double sum = 0.0;
    for (const auto& [key, p] : probs_) {
      if (!(p >= -1e-15)) throw ValidationError("probability must be nonnegative");
      sum += p;
    }
    if (!subnormalized_ && std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("distribution is not normalized (sum = " + std::to_string(sum) + ")");
    if (subnormalized_ && sum > 1.0 + 1e-9)
      throw ValidationError("sub-normalized distribution sums above one");
  }

  double operator[](const Key& key) const {
    auto it = probs_.find(key);
    return it == probs_.end() ? 0.0 : it->second;
  }

  const map_type& values() const { return probs_; }
  bool subnormalized() const { return subnormalized_; }
  std::size_t size() const { return probs_.size(); }
  auto begin() const { return probs_.begin(); }
  auto end() const { return probs_.end(); }

  double total() const {
    double sum = 0.0;
    for (const auto& [key, p] : probs_) sum += p;
    return sum;
  }

  ProbDist normalized() const {
    const double sum = total();
    if (sum <= 0.0) throw EmptyDistributionError("cannot normalize an empty distribution");
    map_type out;
    for (const auto& [key, p] : probs_) out.emplace(key, p / sum);
    return ProbDist(std::move(out));
  }

 private:
  map_type probs_;
  bool subnormalized_ = false;
};

namespace detail {

template <class Key, class Fn>
void for_each_joint(const ProbDist<Key>& a, const ProbDist<Key>& b, Fn&& fn) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      fn(ia->second, 0.0);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      fn(0.0, ib->second);
      ++ib;
    } else {
      fn(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
}

}  // namespace detail

/// S = (sum sqrt(P P'))^2 / (sum P * sum P'). Sub-normalized inputs are
/// implicitly renormalized by the denominator.
template <class Key>
double similarity(const ProbDist<Key>& p, const ProbDist<Key>& q) {
  const double sp = p.total();
  const double sq = q.total();
  if (sp <= 0.0 || sq <= 0.0) throw EmptyDistributionError("similarity of an empty distribution");
  double overlap = 0.0;
  detail::for_each_joint(p, q, [&](double a, double b) { overlap += std::sqrt(a * b); });
  return std::min(1.0, overlap * overlap / (sp * sq));
}

/// Total variation distance after renormalizing both arguments.
template <class Key>
double tvd(const ProbDist<Key>& p, const ProbDist<Key>& q) {
  const double sp = p.total();
  const double sq = q.total();
  if (sp <= 0.0 || sq <= 0.0) throw EmptyDistributionError("tvd of an empty distribution");
  double sum = 0.0;
  detail::for_each_joint(p, q, [&](double a, double b) { sum += std::abs(a / sp - b / sq); });
  return 0.5 * sum;
}

template <class Key>
struct CountRecord {
  std::map<Key, std::uint64_t> counts;
  std::uint64_t shots = 0;

  std::uint64_t operator[](const Key& key) const {
    auto it = counts.find(key);
    return it == counts.end() ? 0 : it->second;
  }

  std::uint64_t recorded() const {
    std::uint64_t sum = 0;
    for (const auto& [key, c] : counts) sum += c;
    return sum;
  }
};

/// Generator used for every stochastic routine; the name is written into
/// output metadata.
using Rng = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64";

/// Independent stream seed for task `task` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Multinomial draw of `shots` events. Probability mass missing from a
/// sub-normalized distribution corresponds to unrecorded events.
template <class Key>
CountRecord<Key> sample_counts(const ProbDist<Key>& p, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw ValidationError("shots must be positive");
  Rng rng(seed);
  CountRecord<Key> rec;
  rec.shots = shots;
  std::uint64_t remaining = shots;
  double mass_left = 1.0;
  for (const auto& [key, prob] : p) {
    if (remaining == 0) break;
    std::uint64_t k = 0;
    if (prob > 0.0) {
      const double frac = std::clamp(prob / mass_left, 0.0, 1.0);
      if (frac >= 1.0) {
        k = remaining;
      } else {
        std::binomial_distribution<std::uint64_t> draw(remaining, frac);
        k = draw(rng);
      }
    }
    if (k > 0) rec.counts.emplace(key, k);
    remaining -= k;
    mass_left -= prob;
    if (mass_left <= 0.0) break;
  }
  return rec;
}

template <class Key>
std::map<Key, double> poisson_sigma(const CountRecord<Key>& rec) {
  std::map<Key, double> sigma;
  for (const auto& [key, c] : rec.counts) sigma.emplace(key, std::sqrt(static_cast<double>(c)));
  return sigma;
}

template <class Key>
ProbDist<Key> frequencies(const CountRecord<Key>& rec) {
  const auto total = rec.recorded();
  if (total == 0) throw EmptyDistributionError("no recorded counts");
  typename ProbDist<Key>::map_type out;
  for (const auto& [key, c] : rec.counts)
    out.emplace(key, static_cast<double>(c) / static_cast<double>(total));
  return ProbDist<Key>(std::move(out));
}

}  // namespace twistwalk
