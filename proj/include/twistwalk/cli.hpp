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

// Subcommand drivers. Each driver validates its whole config, runs the
// simulation and returns the output files in memory; write_outputs puts them
// on disk. Every file carries the tool version and the resolved config.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "twistwalk/config.hpp"
#include "twistwalk/errors.hpp"
#include "twistwalk/hologram.hpp"
#include "twistwalk/io.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"
#include "twistwalk/multiphoton.hpp"
#include "twistwalk/radial.hpp"
#include "twistwalk/spectral.hpp"
#include "twistwalk/version.hpp"
#include "twistwalk/wavepacket.hpp"

namespace twistwalk {

class IoError : public Error {
 public:
  using Error::Error;
};

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string content;
};

struct RunOutput {
  Command command = Command::Walk;
  json config;  // resolved
  std::vector<OutputFile> files;

  const OutputFile& file(const std::string& name) const {
    for (const auto& f : files)
      if (f.name == name) return f;
    throw Error("no output file '" + name + "'");
  }
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitIo = 4 };

namespace detail {

class OutputBuilder {
 public:
  OutputBuilder(Command c, const json& cfg) : prov_{std::string(command_name(c)), cfg}, stem_(cfg.at("name")) {}

  const Provenance& provenance() const { return prov_; }

  /// Document with the provenance header followed by `body`'s fields.
  json document(const json& body) const {
    json j{{"tool", "twistwalk"}, {"version", kVersion}, {"command", prov_.command}, {"config", prov_.config}};
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j;
  }

  void add_json(const std::string& suffix, const json& body) { add(suffix + ".json", dump(document(body))); }

  template <class Fn>
  void add_csv(const std::string& suffix, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    add(suffix + ".csv", os.str());
  }

  void add(const std::string& suffix, std::string content) {
    files_.push_back({stem_ + suffix, std::move(content)});
  }

  RunOutput finish(Command c) {
    return {c, prov_.config, std::move(files_)};
  }

 private:
  Provenance prov_;
  std::string stem_;
  std::vector<OutputFile> files_;
};

inline json stats_json(const ProbDist<int>& p) {
  return json{{"mean_oam", mean_oam(p)}, {"variance", oam_variance(p)}, {"distribution", distribution_to_json(p)}};
}

inline void write_step_marginals(std::ostream& os, const Provenance& prov, const std::vector<ProbDist<int>>& marginals) {
  CsvWriter csv(os, prov, {"step", "m", "P"});
  for (std::size_t n = 0; n < marginals.size(); ++n)
    for (const auto& [m, prob] : marginals[n]) csv.write(static_cast<int>(n), m, prob);
}

inline EfficiencyMap read_efficiency(ConfigReader& r, const std::string& key) {
  json& v = r.raw(key);
  EfficiencyMap eta;
  if (v.is_null()) return eta;
  if (!v.is_object() || v.empty()) ConfigReader::fail(key, "expected null or an object {\"m\": eta}");
  json norm = json::object();
  for (const auto& [k, val] : v.items()) {
    int m = 0;
    const auto [end, ec] = std::from_chars(k.data(), k.data() + k.size(), m);
    if (ec != std::errc{} || end != k.data() + k.size()) ConfigReader::fail(key + "." + k, "keys must be integers");
    const double e = ConfigReader::to_number(val, key + "." + k);
    if (!(e > 0.0 && e <= 1.0)) ConfigReader::fail(key + "." + k, "efficiency must lie in (0, 1]");
    eta[m] = e;
  }
  for (const auto& [m, e] : eta) norm[std::to_string(m)] = e;
  v = std::move(norm);
  return eta;
}

inline SpectralOptions read_spectral(ConfigReader& r) {
  SpectralOptions o;
  o.reference_phase = r.number("reference_phase");
  o.mirror = r.boolean("mirror");
  return o;
}

inline Pol parse_pol(const json& v, const std::string& field) {
  if (v.is_string()) {
    if (v.get<std::string>() == "L") return Pol::L;
    if (v.get<std::string>() == "R") return Pol::R;
  }
  ConfigReader::fail(field, "input polarization must be \"L\" or \"R\"");
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunOutput run_walk(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const StepSequence seq = read_step(r);
  const int steps = r.integer("steps", 0, 100000);
  const int m0 = r.integer("m0", -1000000, 1000000);
  const PolState coin = read_coin(r, "coin");
  const std::optional<OamWindow> window_opt = read_window(r, "window");
  const double d_over_zr = r.number_at_least("d_over_zr", 0.0, false);
  const EfficiencyMap eta = detail::read_efficiency(r, "efficiency");
  const std::uint64_t shots = r.count("shots");
  const std::uint64_t seed = r.count("seed");
  validate_output(r);

  const int reach = (steps + 2) * std::max(1, seq.max_displacement());
  const OamWindow window = window_opt.value_or(OamWindow{m0 - reach, m0 + reach});
  if (!window.contains(m0)) ConfigReader::fail("window", "must contain m0");
  if (validate_only) return {Command::Walk, cfg, {}};

  std::vector<SpinOrbitState> states{make_localized_state(m0, coin, window)};
  for (int n = 1; n <= steps; ++n) {
    SpinOrbitState s = n > 1 ? gouy_step_dephasing(states.back(), d_over_zr) : states.back();
    states.push_back(apply_step(std::move(s), seq));
  }
  states.back().check_edges();
  std::vector<ProbDist<int>> marginals;
  for (const auto& s : states) marginals.push_back(oam_marginal(s));

  detail::OutputBuilder out(Command::Walk, cfg);
  const auto& prov = out.provenance();
  out.add_csv("_marginals", [&](std::ostream& os) { detail::write_step_marginals(os, prov, marginals); });
  out.add_csv("_final", [&](std::ostream& os) { write_distribution_csv(os, prov, marginals.back()); });

  json step_list = json::array();
  for (std::size_t n = 0; n < states.size(); ++n) {
    json j{{"step", n}, {"norm", states[n].norm_sq()}};
    const json stats = detail::stats_json(marginals[n]);
    for (const auto& [k, v] : stats.items()) j[k] = v;
    step_list.push_back(std::move(j));
  }
  json body{{"steps", std::move(step_list)},
            {"coin_walker_entropy", coin_walker_entanglement(states.back())},
            {"final_state", state_to_json(states.back())}};

  if (shots > 0) {
    const ProbDist<int>& theory = marginals.back();
    const ProbDist<int> detected = eta.empty() ? theory : apply_efficiency(theory, eta);
    const auto counts = sample_counts(detected, shots, derive_seed(seed, 0));
    const auto freq = frequencies(counts);
    const ProbDist<int> corrected = eta.empty() ? freq : efficiency_correction(freq, eta);
    const auto sigma = poisson_sigma(counts);
    out.add_csv("_counts", [&](std::ostream& os) {
      CsvWriter csv(os, prov, {"m", "count", "sigma"});
      for (const auto& [m, c] : counts.counts) csv.write(m, c, sigma.at(m));
    });
    out.add_json("_metrics", metrics_report(similarity(corrected, theory), tvd(corrected, theory), shots, seed));
  }
  out.add_json("", body);
  return out.finish(Command::Walk);
}

inline RunOutput run_bands(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const StepSequence seq = read_step(r);
  const int k_points = r.integer("k_points", 2, 10000000);
  std::vector<double> k_grid = read_number_list(r, "k_values", true);
  const int winding_points = r.integer("winding_points", 8, 10000000);
  const SpectralOptions opts = detail::read_spectral(r);
  validate_output(r);
  if (k_grid.empty()) k_grid = brillouin_grid(k_points);
  try {
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
      if (!(k_grid[i] > -kPi - 1e-12 && k_grid[i] <= kPi + 1e-12)) throw ValidationError("values must lie in (-pi, pi]");
      if (i > 0 && !(k_grid[i] > k_grid[i - 1])) throw ValidationError("values must be strictly increasing");
    }
  } catch (const ValidationError& e) {
    ConfigReader::fail("k_values", e.what());
  }
  if (validate_only) return {Command::Bands, cfg, {}};

  const BandStructure bs = dispersion(seq, k_grid, opts);
  std::vector<std::array<double, 2>> v;
  v.reserve(bs.size());
  for (double k : bs.k) v.push_back(group_velocity(seq, k, opts));

  const bool closed = has_closed_form_dispersion(seq) && std::abs(opts.reference_phase - kPi / 2.0) < 1e-15;
  double closed_err = 0.0, gap = 2.0 * kPi, vmax = 0.0;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (closed) {
      const auto cf = closed_form_quasi_energies(bs.k[i], opts.mirror);
      for (int b = 0; b < 2; ++b) closed_err = std::max(closed_err, std::abs(wrap_angle(bs.omega[b][i] - cf[b])));
    }
    gap = std::min(gap, std::abs(wrap_angle(bs.omega[0][i] - bs.omega[1][i])));
    vmax = std::max({vmax, std::abs(v[i][0]), std::abs(v[i][1])});
  }

  json winding;
  try {
    const Winding w = winding_number(seq, winding_points, opts);
    winding = json{{"value", w.value}, {"raw", w.raw}, {"planarity_residual", w.residual}};
  } catch (const NotPlanarError& e) {
    winding = json{{"value", nullptr}, {"error", e.what()}};
  }

  detail::OutputBuilder out(Command::Bands, cfg);
  const auto& prov = out.provenance();
  out.add_csv("", [&](std::ostream& os) {
    CsvWriter csv(os, prov, {"k", "omega1", "omega2", "V1", "V2", "s1x", "s1y", "s1z"});
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const Stokes& s = bs.stokes[0][i];
      csv.write(bs.k[i], bs.omega[0][i], bs.omega[1][i], v[i][0], v[i][1], s[0], s[1], s[2]);
    }
  });
  json closed_json{{"applies", closed}};
  closed_json["max_error"] = closed ? json(closed_err) : json(nullptr);
  out.add_json("", json{{"k_points", bs.size()},
                        {"closed_form", std::move(closed_json)},
                        {"gap", gap},
                        {"max_abs_group_velocity", vmax},
                        {"winding", std::move(winding)}});
  return out.finish(Command::Bands);
}

inline RunOutput run_wavepacket(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const StepSequence seq = read_step(r);
  const std::string mode = r.string("mode", {"packet", "sweep", "cat"});
  WavepacketSpec spec;
  spec.sigma = r.number_at_least("sigma", 0.0, true);
  spec.k0 = r.number("k0");
  spec.band = r.integer("band", 1, 2);
  const int steps = r.integer("steps", 0, 100000);
  std::vector<double> sweep = read_number_list(r, "sweep_k0", true);
  spec.spectral = detail::read_spectral(r);
  validate_output(r);
  if (mode == "sweep") {
    if (sweep.empty()) sweep = half_zone_grid(8);
    for (double k : sweep)
      if (!(k >= -1e-12 && k <= kPi + 1e-12)) ConfigReader::fail("sweep_k0", "values must lie in [0, pi]");
  }
  if (validate_only) return {Command::Wavepacket, cfg, {}};

  detail::OutputBuilder out(Command::Wavepacket, cfg);
  const auto& prov = out.provenance();
  const int spacing = seq.lattice_spacing();

  if (mode == "packet") {
    const Propagation prop = propagate(spec, seq, steps);
    out.add_csv("_marginals", [&](std::ostream& os) { detail::write_step_marginals(os, prov, prop.marginals); });
    out.add_csv("_final", [&](std::ostream& os) { write_distribution_csv(os, prov, prop.marginals.back()); });
    json step_list = json::array();
    for (std::size_t n = 0; n < prop.marginals.size(); ++n) {
      json j{{"step", n}};
      const json stats = detail::stats_json(prop.marginals[n]);
      for (const auto& [k, v] : stats.items()) j[k] = v;
      step_list.push_back(std::move(j));
    }
    const double drift = steps > 0 ? (mean_oam(prop.marginals.back()) - mean_oam(prop.marginals.front())) /
                                         (steps * static_cast<double>(spacing))
                                   : 0.0;
    out.add_json("", json{{"initial_quasi_momentum", mean_quasi_momentum(prop.states.front(), spacing, spec.spectral.mirror)},
                          {"expected_drift", expected_drift(seq, spec.band, spec.k0, spec.spectral)},
                          {"drift", drift},
                          {"coin_walker_entropy", coin_walker_entanglement(prop.states.back())},
                          {"steps", std::move(step_list)}});
  } else if (mode == "sweep") {
    const auto points = brillouin_sweep(spec, seq, sweep, steps);
    out.add_csv("_sweep", [&](std::ostream& os) {
      CsvWriter csv(os, prov, {"k0", "mean_oam", "variance"});
      for (const auto& p : points) csv.write(p.k0, p.mean, p.variance);
    });
    json list = json::array();
    for (const auto& p : points)
      list.push_back(json{{"k0", p.k0},
                          {"mean_oam", p.mean},
                          {"variance", p.variance},
                          {"expected_mean", steps * spacing * expected_drift(seq, spec.band, p.k0, spec.spectral)}});
    out.add_json("", json{{"points", std::move(list)}});
  } else {
    const CatSplit cat = cat_split(spec, seq, steps);
    out.add_csv("_final", [&](std::ostream& os) { write_distribution_csv(os, prov, cat.marginal); });
    out.add_json("", json{{"coin_walker_entropy", cat.entropy},
                          {"left_mass", cat.left_mass},
                          {"right_mass", cat.right_mass},
                          {"peaks", cat.peaks},
                          {"separation", cat.separation},
                          {"distribution", distribution_to_json(cat.marginal)}});
  }
  return out.finish(Command::Wavepacket);
}

inline RunOutput run_twophoton(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const StepSequence seq = read_step(r);
  const int steps = r.integer("steps", 0, 1000);
  json& inputs_json = r.raw("inputs");
  if (!inputs_json.is_array() || inputs_json.size() != 2)
    ConfigReader::fail("inputs", "expected two input modes [[pol, m], [pol, m]]");
  std::array<ModeIndex, 2> in;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string field = "inputs[" + std::to_string(i) + "]";
    const json& e = inputs_json[i];
    if (!e.is_array() || e.size() != 2) ConfigReader::fail(field, "expected [pol, m]");
    in[i] = lr_mode(detail::parse_pol(e[0], field + "[0]"),
                    static_cast<int>(ConfigReader::to_integer(e[1], field + "[1]")));
  }
  const PolBasis basis = parse_basis(r.string("basis", {"LR", "HV"}));
  std::optional<double> x;
  if (!r.raw("indistinguishability").is_null()) {
    x = r.number("indistinguishability");
    if (!(*x >= 0.0 && *x <= 1.0)) ConfigReader::fail("indistinguishability", "must lie in [0, 1]");
  }
  const Inequality which = parse_inequality(r.string("inequality", {"classical", "photon"}));
  const std::uint64_t shots = r.count("shots");
  const std::uint64_t seed = r.count("seed");
  validate_output(r);
  if (validate_only) return {Command::Twophoton, cfg, {}};

  const OamWindow input_window{std::min(in[0].m, in[1].m), std::max(in[0].m, in[1].m)};
  const SingleParticleUnitary t = lift_walk_unitary(seq, steps, input_window, basis);
  const JointDistribution ipt = ipt_joint(t, in[0], in[1]);
  const JointDistribution dpt = dpt_joint(t, in[0], in[1]);

  detail::OutputBuilder out(Command::Twophoton, cfg);
  const auto& prov = out.provenance();
  auto joint_csv = [&](const JointDistribution& d) {
    return [&prov, &d](std::ostream& os) {
      ProbDist<ModePair>::map_type kept;
      for (const auto& [pair, prob] : d.coincidence)
        if (prob > kOutcomeThreshold) kept.emplace(pair, prob);
      write_joint_csv(os, prov, ProbDist<ModePair>(std::move(kept), true));
    };
  };
  out.add_csv("_ipt", joint_csv(ipt));
  out.add_csv("_dpt", joint_csv(dpt));

  std::vector<const JointDistribution*> all{&ipt, &dpt};
  std::optional<JointDistribution> partial;
  if (x) {
    partial = joint_distribution(t, in[0], in[1], *x);
    out.add_csv("_partial", joint_csv(*partial));
    all.push_back(&*partial);
  }

  const auto modes = outcome_modes(all);
  const auto ipt_terms = inequality_scan(ipt.coincidence, modes, which);
  out.add_csv("_terms", [&](std::ostream& os) {
    CsvWriter csv(os, prov, {"pol1", "m1", "pol2", "m2", "T_ipt", "T_dpt"});
    for (const auto& term : ipt_terms)
      csv.write(term.p.pol_label(), term.p.m, term.q.pol_label(), term.q.m, term.T,
                inequality_T(which, dpt.coincidence, term.p, term.q));
  });

  auto model_json = [&](const JointDistribution& d) {
    const auto terms = inequality_scan(d.coincidence, modes, which);
    std::size_t violations = 0;
    for (const auto& term : terms)
      if (term.T > kOutcomeThreshold) ++violations;
    return json{{"coincidence_total", d.coincidence_total()},
                {"mode_coincidence", d.mode_coincidence()},
                {"max_T", terms.empty() ? 0.0 : terms.front().T},
                {"violations", violations}};
  };
  json body{{"modes", modes.size()},
            {"ipt", model_json(ipt)},
            {"dpt", model_json(dpt)},
            {"similarity_ipt_dpt", similarity(ipt.coincidence, dpt.coincidence)},
            {"tvd_ipt_dpt", tvd(ipt.coincidence, dpt.coincidence)}};
  if (partial) body["partial"] = model_json(*partial);

  if (shots > 0) {
    const auto counts = sample_counts(ipt.coincidence, shots, derive_seed(seed, 0));
    auto sig = violation_significance(counts, which);
    std::stable_sort(sig.begin(), sig.end(), [](const auto& a, const auto& b) { return a.significance > b.significance; });
    out.add_csv("_significance", [&](std::ostream& os) { write_significance_csv(os, prov, sig); });
    const auto freq = frequencies(counts);
    out.add_json("_metrics", metrics_report(similarity(freq, ipt.coincidence), tvd(freq, ipt.coincidence), shots, seed));
    body["recorded"] = counts.recorded();
    body["top_significance"] = sig.empty() ? 0.0 : sig.front().significance;
  }
  out.add_json("", body);
  return out.finish(Command::Twophoton);
}

inline RunOutput run_hologram(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const std::string target = r.string("target", {"oam", "wavepacket", "coefficients", "uniform"});
  const int m = r.integer("m", -1000, 1000);
  const double sigma = r.number_at_least("sigma", 0.0, true);
  const double k0 = r.number("k0");
  HologramGrid grid;
  grid.width = r.integer("width", 1, 16384);
  grid.height = r.integer("height", 1, 16384);
  grid.pixel_pitch = r.number_at_least("pixel_pitch", 0.0, true);
  const double period = r.number_at_least("carrier_period", 0.0, false);
  grid.carrier = period > 0.0 ? 1.0 / (period * grid.pixel_pitch) : 0.0;
  Beam beam;
  beam.waist = r.number_at_least("waist", 0.0, true);
  beam.wavelength = r.number_at_least("wavelength", 0.0, true);
  const bool write_csv = r.boolean("write_csv");

  std::map<int, cplx> coeffs;
  json& cj = r.raw("coefficients");
  if (target == "coefficients") {
    if (!cj.is_array() || cj.empty()) ConfigReader::fail("coefficients", "expected [[m, re, im], ...]");
    for (std::size_t i = 0; i < cj.size(); ++i) {
      const std::string field = "coefficients[" + std::to_string(i) + "]";
      const json& e = cj[i];
      if (!e.is_array() || e.size() != 3) ConfigReader::fail(field, "expected [m, re, im]");
      const int mm = static_cast<int>(ConfigReader::to_integer(e[0], field + "[0]"));
      coeffs[mm] += cplx(ConfigReader::to_number(e[1], field + "[1]"), ConfigReader::to_number(e[2], field + "[2]"));
    }
    json norm = json::array();
    for (const auto& [mm, c] : coeffs) norm.push_back(json::array({mm, c.real(), c.imag()}));
    cj = std::move(norm);
  } else if (!cj.is_null()) {
    ConfigReader::fail("coefficients", "only used with target \"coefficients\"");
  }
  validate_output(r);
  if (validate_only) return {Command::Hologram, cfg, {}};
  grid.validate();

  HologramMap h;
  if (target == "uniform") {
    h = make_hologram(grid, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  } else {
    if (target == "oam") coeffs = {{m, 1.0}};
    if (target == "wavepacket") {
      const int tail = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * std::log(1.0 / kEnvelopeTail))));
      double norm = 0.0;
      for (int j = -tail; j <= tail; ++j) {
        const cplx c = std::polar(std::exp(-0.5 * j * j / (sigma * sigma)), -k0 * j);
        coeffs[j] = c;
        norm += std::norm(c);
      }
      for (auto& [j, c] : coeffs) c /= std::sqrt(norm);
    }
    h = make_oam_hologram(grid, coeffs, beam);
  }

  detail::OutputBuilder out(Command::Hologram, cfg);
  const auto& prov = out.provenance();
  std::ostringstream pgm;
  write_pgm(pgm, h, {"twistwalk " + std::string(kVersion) + " hologram", "config " + prov.config.dump()});
  out.add(".pgm", pgm.str());
  if (write_csv) {
    out.add_csv("", [&](std::ostream& os) {
      CsvWriter csv(os, prov, {"x", "y", "phase"});
      for (int j = 0; j < grid.height; ++j)
        for (int i = 0; i < grid.width; ++i) csv.write(i, j, h.at(i, j));
    });
  }
  const auto [lo, hi] = std::minmax_element(h.phase.begin(), h.phase.end());
  json body{{"phase_min", *lo}, {"phase_max", *hi}};
  if (target == "oam") {
    const double ring = strongest_ring(h);
    body["ring_radius_px"] = ring;
    body["fork_order"] = fork_order(h, ring);
  }
  out.add_json("", body);
  return out.finish(Command::Hologram);
}

inline RunOutput run_radial(json cfg, bool validate_only = false) {
  ConfigReader r(cfg);
  const std::vector<int> ms = read_int_list(r, "m_values");
  const int p_max = r.integer("p_max", 0, 60);
  const std::vector<double> zetas = read_number_list(r, "zeta", false);
  for (std::size_t i = 0; i < zetas.size(); ++i)
    if (!(zetas[i] >= 0.0)) ConfigReader::fail("zeta[" + std::to_string(i) + "]", "must be nonnegative");
  for (int m : ms)
    if (std::abs(m) > 60) ConfigReader::fail("m_values", "|m| must not exceed 60");
  validate_output(r);
  if (validate_only) return {Command::Radial, cfg, {}};

  detail::OutputBuilder out(Command::Radial, cfg);
  const auto& prov = out.provenance();
  std::vector<RadialExpansion> expansions;
  for (int m : ms) expansions.push_back(qplate_radial_coefficients(m, p_max));

  for (const auto& e : expansions)
    out.add_csv("_m" + std::to_string(e.input_m), [&](std::ostream& os) {
      CsvWriter csv(os, prov, {"p", "abs_c_sq"});
      for (int p = 0; p <= p_max; ++p) csv.write(p, e.power(p));
    });
  out.add_csv("_table", [&](std::ostream& os) {
    CsvWriter csv(os, prov, {"m", "p", "abs_c_sq"});
    for (const auto& e : expansions)
      for (int p = 0; p <= p_max; ++p) csv.write(e.input_m, p, e.power(p));
  });

  std::vector<std::array<double, 3>> overlaps;
  for (int m : ms)
    for (double z : zetas) overlaps.push_back({static_cast<double>(m), z, pupil_overlap(m, z)});
  out.add_csv("_overlap", [&](std::ostream& os) {
    CsvWriter csv(os, prov, {"m", "zeta", "overlap"});
    for (const auto& o : overlaps) csv.write(static_cast<int>(o[0]), o[1], o[2]);
  });

  json table = json::array();
  for (const auto& e : expansions) {
    json powers = json::array();
    for (int p = 0; p <= p_max; ++p) powers.push_back(e.power(p));
    const PupilReport pr = pupil_plane_action(e.input_m);
    table.push_back(json{{"m", e.input_m},
                         {"abs_c_sq", std::move(powers)},
                         {"residual", e.residual},
                         {"hygg_p", pr.hygg_p},
                         {"output_m", pr.output_m},
                         {"pupil_overlap", pr.overlap}});
  }
  out.add_json("", json{{"inputs", std::move(table)}});
  return out.finish(Command::Radial);
}

/// Runs a merged (not yet validated) config. With validate_only the result
/// holds the resolved config and no files.
inline RunOutput run_command(Command c, json merged, bool validate_only = false) {
  switch (c) {
    case Command::Walk: return run_walk(std::move(merged), validate_only);
    case Command::Bands: return run_bands(std::move(merged), validate_only);
    case Command::Wavepacket: return run_wavepacket(std::move(merged), validate_only);
    case Command::Twophoton: return run_twophoton(std::move(merged), validate_only);
    case Command::Hologram: return run_hologram(std::move(merged), validate_only);
    case Command::Radial: return run_radial(std::move(merged), validate_only);
  }
  throw ConfigError("unknown subcommand");
}

/// Writes every file under the output directory; returns the written paths.
inline json resolve_config(Command c, json merged) { return run_command(c, std::move(merged), true).config; }

inline std::vector<std::filesystem::path> write_outputs(const RunOutput& run) {
  namespace fs = std::filesystem;
  const fs::path dir = run.config.at("output_dir").get<std::string>();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<fs::path> written;
  for (const auto& f : run.files) {
    const fs::path path = dir / f.name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
    os.close();
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

/// Reads a JSON config file; I/O failures raise IoError, malformed JSON ConfigError.
inline json read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config '" + path.string() + "' is not valid JSON");
  return j;
}

/// Exit code for an exception escaping a run.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitConfig;
  return 1;
}

}  // namespace twistwalk
