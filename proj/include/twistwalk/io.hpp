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

// Serialization: JSON for states and reports, CSV for tabular results.
// Floating-point values are written with 17 significant digits so files
// round-trip exactly and are byte-stable across runs. CSV files start with
// '#' comment lines carrying the tool version and the resolved configuration.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"
#include "twistwalk/multiphoton.hpp"
#include "twistwalk/version.hpp"

namespace twistwalk {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Provenance {
  std::string command;
  json config;
};

inline void write_provenance(std::ostream& os, const Provenance& p) {
  os << "# twistwalk " << kVersion << ' ' << p.command << '\n';
  os << "# config " << p.config.dump() << '\n';
}

/// Minimal CSV writer: header row, then rows of preformatted cells.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const Provenance& p, std::vector<std::string_view> header) : os_(os) {
    write_provenance(os_, p);
    row(header);
  }

  template <class... Cells>
  void write(const Cells&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

 private:
  void row(const std::vector<std::string_view>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostream& os_;
};

/// {"m_min", "m_max", "amplitudes": [[re, im], ...]} in polarization-major order.
inline json state_to_json(const SpinOrbitState& s) {
  json amps = json::array();
  for (const cplx& a : s.amplitudes()) amps.push_back(json::array({a.real(), a.imag()}));
  return json{{"m_min", s.window().min}, {"m_max", s.window().max}, {"amplitudes", std::move(amps)}};
}

inline SpinOrbitState state_from_json(const json& j) {
  try {
    const OamWindow w{j.at("m_min").get<int>(), j.at("m_max").get<int>()};
    if (w.max < w.min) throw ValidationError("state JSON: m_max < m_min");
    const auto& arr = j.at("amplitudes");
    if (!arr.is_array() || arr.size() != 2 * static_cast<std::size_t>(w.size()))
      throw ValidationError("state JSON: amplitudes must hold 2 * (m_max - m_min + 1) entries");
    std::vector<cplx> amps;
    amps.reserve(arr.size());
    for (const auto& a : arr) {
      if (!a.is_array() || a.size() != 2) throw ValidationError("state JSON: each amplitude is [re, im]");
      amps.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    return SpinOrbitState(w, std::move(amps));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("state JSON: ") + e.what());
  }
}

inline json distribution_to_json(const ProbDist<int>& p) {
  json out = json::array();
  for (const auto& [m, prob] : p) out.push_back(json::array({m, prob}));
  return out;
}

inline void write_distribution_csv(std::ostream& os, const Provenance& prov, const ProbDist<int>& p) {
  CsvWriter csv(os, prov, {"m", "P"});
  for (const auto& [m, prob] : p) csv.write(m, prob);
}

inline void write_joint_csv(std::ostream& os, const Provenance& prov, const ProbDist<ModePair>& p) {
  CsvWriter csv(os, prov, {"pol1", "m1", "pol2", "m2", "P"});
  for (const auto& [pair, prob] : p)
    csv.write(pair.first.pol_label(), pair.first.m, pair.second.pol_label(), pair.second.m, prob);
}

inline void write_significance_csv(std::ostream& os, const Provenance& prov, const std::vector<TermSignificance>& terms) {
  CsvWriter csv(os, prov, {"pol1", "m1", "pol2", "m2", "T", "sigma", "significance"});
  for (const auto& t : terms) csv.write(t.p.pol_label(), t.p.m, t.q.pol_label(), t.q.m, t.T, t.sigma, t.significance);
}

inline json metrics_report(double similarity_value, double tvd_value, std::uint64_t shots, std::uint64_t seed) {
  return json{{"similarity", similarity_value}, {"tvd", tvd_value}, {"shots", shots}, {"seed", seed}, {"rng", kRngName}};
}

/// JSON dump with a trailing newline; doubles use the shortest round-trip form.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace twistwalk
