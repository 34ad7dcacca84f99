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

// Declarative run configuration. Each subcommand has a default object; a
// config file and `key=value` overrides are merged into it, unknown keys are
// rejected, and every field is validated and normalized before any
// computation. Numeric fields accept arithmetic expressions such as "pi/2"
// or "1/sqrt(2)"; the resolved config stores the evaluated numbers.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "twistwalk/errors.hpp"
#include "twistwalk/lattice.hpp"

namespace twistwalk {

using json = nlohmann::ordered_json;

/// Invalid configuration; the message names the offending field.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

// Recursive-descent evaluator for + - * / ( ) pi sqrt() and decimal literals.
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : s_(text) {}

  double parse() {
    const double v = sum();
    skip();
    if (pos_ != s_.size()) fail();
    return v;
  }

 private:
  double sum() {
    double v = product();
    for (;;) {
      skip();
      if (eat('+')) v += product();
      else if (eat('-')) v -= product();
      else return v;
    }
  }

  double product() {
    double v = unary();
    for (;;) {
      skip();
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }

  double unary() {
    skip();
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }

  double primary() {
    skip();
    if (eat('(')) {
      const double v = sum();
      skip();
      if (!eat(')')) fail();
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "pi") return kPi;
      if (name == "sqrt") {
        skip();
        if (!eat('(')) fail();
        const double v = sum();
        skip();
        if (!eat(')')) fail();
        return std::sqrt(v);
      }
      fail();
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail();
    pos_ = static_cast<std::size_t>(end - s_.data());
    return v;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail() const {
    throw ValidationError("cannot evaluate expression '" + std::string(s_) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline double evaluate_expression(std::string_view text) { return detail::ExpressionParser(text).parse(); }

enum class Command { Walk, Bands, Wavepacket, Twophoton, Hologram, Radial };

inline constexpr Command kCommands[] = {Command::Walk,      Command::Bands,    Command::Wavepacket,
                                        Command::Twophoton, Command::Hologram, Command::Radial};

inline std::string_view command_name(Command c) {
  switch (c) {
    case Command::Walk: return "walk";
    case Command::Bands: return "bands";
    case Command::Wavepacket: return "wavepacket";
    case Command::Twophoton: return "twophoton";
    case Command::Hologram: return "hologram";
    case Command::Radial: return "radial";
  }
  return "";
}

inline Command parse_command(std::string_view s) {
  for (Command c : kCommands)
    if (command_name(c) == s) return c;
  throw ConfigError("unknown subcommand '" + std::string(s) + "'");
}

namespace detail {

inline json step_defaults(std::string_view preset) {
  return json{{"preset", preset}, {"elements", nullptr}, {"delta", kPi}, {"q", 0.5}, {"alpha0", 0.0}};
}

inline json output_defaults(std::string_view name) { return json{{"output_dir", "."}, {"name", name}}; }

inline void append(json& into, const json& more) {
  for (const auto& [k, v] : more.items()) into[k] = v;
}

}  // namespace detail

/// Default configuration of a subcommand; its keys are the accepted keys.
inline json default_config(Command c) {
  json j = json::object();
  switch (c) {
    case Command::Walk:
      detail::append(j, detail::step_defaults("standard-paper"));
      detail::append(j, json{{"steps", 4},
                             {"m0", 0},
                             {"coin", "R"},
                             {"window", nullptr},
                             {"d_over_zr", 0.0},
                             {"efficiency", nullptr},
                             {"shots", 0},
                             {"seed", 1}});
      break;
    case Command::Bands:
      detail::append(j, detail::step_defaults("wavepacket"));
      detail::append(j, json{{"k_points", 1001},
                             {"k_values", nullptr},
                             {"winding_points", 4096},
                             {"reference_phase", kPi / 2.0},
                             {"mirror", false}});
      break;
    case Command::Wavepacket:
      detail::append(j, detail::step_defaults("wavepacket"));
      detail::append(j, json{{"mode", "packet"},
                             {"sigma", 2.0},
                             {"k0", 0.0},
                             {"band", 1},
                             {"steps", 5},
                             {"sweep_k0", nullptr},
                             {"reference_phase", kPi / 2.0},
                             {"mirror", false}});
      break;
    case Command::Twophoton:
      detail::append(j, detail::step_defaults("wavepacket"));
      detail::append(j, json{{"steps", 3},
                             {"inputs", json::array({json::array({"L", 0}), json::array({"R", 0})})},
                             {"basis", "LR"},
                             {"indistinguishability", nullptr},
                             {"inequality", "photon"},
                             {"shots", 10000},
                             {"seed", 1}});
      break;
    case Command::Hologram:
      j = json{{"target", "oam"},
               {"m", 3},
               {"sigma", 2.0},
               {"k0", 0.0},
               {"coefficients", nullptr},
               {"width", 256},
               {"height", 256},
               {"pixel_pitch", 20e-6},
               {"carrier_period", 8.0},
               {"waist", 1e-3},
               {"wavelength", 800e-9},
               {"write_csv", true}};
      break;
    case Command::Radial:
      j = json{{"m_values", json::array({0, 1, 2, 3})},
               {"p_max", 3},
               {"zeta", json::array({0.0, 0.05, 0.1, 0.2})}};
      break;
  }
  detail::append(j, detail::output_defaults(command_name(c)));
  return j;
}

/// Typed, normalizing access to a merged config. Each accessor validates one
/// field, writes the normalized value back, and reports errors by field name.
class ConfigReader {
 public:
  explicit ConfigReader(json& cfg) : cfg_(cfg) {}

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
  }

  json& raw(const std::string& key) { return cfg_.at(key); }

  static double to_number(const json& v, const std::string& field) {
    double x = 0.0;
    if (v.is_number()) {
      x = v.get<double>();
    } else if (v.is_string()) {
      try {
        x = evaluate_expression(v.get<std::string>());
      } catch (const ValidationError& e) {
        fail(field, e.what());
      }
    } else {
      fail(field, "expected a number or numeric expression");
    }
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
  }

  double number(const std::string& key) {
    const double x = to_number(cfg_.at(key), key);
    cfg_[key] = x;
    return x;
  }

  double number_at_least(const std::string& key, double lo, bool strict) {
    const double x = number(key);
    if (strict ? !(x > lo) : !(x >= lo)) fail(key, std::string("must be ") + (strict ? "> " : ">= ") + format(lo));
    return x;
  }

  static long long to_integer(const json& v, const std::string& field) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long long>(d);
    }
    fail(field, "expected an integer");
  }

  int integer(const std::string& key, long long lo = std::numeric_limits<int>::min(),
              long long hi = std::numeric_limits<int>::max()) {
    const long long x = to_integer(cfg_.at(key), key);
    if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    cfg_[key] = x;
    return static_cast<int>(x);
  }

  std::uint64_t count(const std::string& key) {
    const json& v = cfg_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long x = to_integer(v, key);
    if (x < 0) fail(key, "must be nonnegative");
    cfg_[key] = static_cast<std::uint64_t>(x);
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(const std::string& key) {
    const json& v = cfg_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::vector<std::string_view> allowed = {}) {
    const json& v = cfg_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    std::string s = v.get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      fail(key, "must be one of: " + list);
    }
    return s;
  }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
  }

  json& cfg_;
};

/// Merges `file` and `overrides` ("key=value") into the defaults of `c`.
/// Values of overrides are parsed as JSON when possible and as plain strings
/// otherwise. Overrides are applied after the file.
inline json merge_config(Command c, const json& file, const std::vector<std::string>& overrides) {
  json cfg = default_config(c);
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!cfg.contains(key))
        throw ConfigError("config field '" + key + "': unknown key for '" + std::string(command_name(c)) + "'");
      cfg[key] = value;
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    if (!cfg.contains(key))
      throw ConfigError("config field '" + key + "': unknown key for '" + std::string(command_name(c)) + "'");
    json value = json::parse(text, nullptr, false);
    cfg[key] = value.is_discarded() ? json(text) : std::move(value);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared field groups.

/// Step from preset/elements/delta/q/alpha0. Elements are normalized to
/// {"type": "waveplate", "retardance", "axis"} or
/// {"type": "qplate", "q", "delta", "alpha0"}.
inline StepSequence read_step(ConfigReader& r) {
  const std::string preset = r.string("preset", {"standard-paper", "wavepacket", "custom"});
  const double delta = r.number("delta");
  const double q = r.number("q");
  const double alpha0 = r.number("alpha0");
  json& els = r.raw("elements");
  std::vector<OpticalElement> out;
  if (preset != "custom") {
    if (!els.is_null()) ConfigReader::fail("elements", "must be null unless preset is \"custom\"");
    out.push_back(WavePlate::quarter(kPi / 4.0));
    out.push_back(QPlate{q, delta, alpha0});
    if (preset == "standard-paper") out.push_back(WavePlate::half(0.0));
  } else {
    if (!els.is_array() || els.empty()) ConfigReader::fail("elements", "preset \"custom\" needs a nonempty array");
    for (std::size_t i = 0; i < els.size(); ++i) {
      const std::string field = "elements[" + std::to_string(i) + "]";
      json& e = els[i];
      if (!e.is_object() || !e.contains("type") || !e["type"].is_string())
        ConfigReader::fail(field, "expected an object with a \"type\"");
      const std::string type = e["type"].get<std::string>();
      auto get = [&](const char* key, std::optional<double> fallback) {
        if (!e.contains(key)) {
          if (!fallback) ConfigReader::fail(field + "." + key, "missing");
          return *fallback;
        }
        return ConfigReader::to_number(e[key], field + "." + key);
      };
      auto check_keys = [&](std::vector<std::string_view> keys) {
        for (const auto& [k, v] : e.items())
          if (std::find(keys.begin(), keys.end(), k) == keys.end())
            ConfigReader::fail(field + "." + k, "unknown key for a " + type);
      };
      json norm;
      if (type == "qwp" || type == "hwp" || type == "waveplate") {
        check_keys({"type", "axis", "retardance"});
        const double fixed = type == "qwp" ? kPi / 2.0 : kPi;
        if (type != "waveplate" && e.contains("retardance"))
          ConfigReader::fail(field + ".retardance", "fixed for a " + type);
        const double ret = type == "waveplate" ? get("retardance", std::nullopt) : fixed;
        const double axis = get("axis", 0.0);
        out.push_back(WavePlate{ret, axis});
        norm = json{{"type", "waveplate"}, {"retardance", ret}, {"axis", axis}};
      } else if (type == "qplate") {
        check_keys({"type", "q", "delta", "alpha0"});
        const QPlate qp{get("q", q), get("delta", delta), get("alpha0", 0.0)};
        try {
          qp.validate();
        } catch (const ValidationError& ex) {
          ConfigReader::fail(field, ex.what());
        }
        out.push_back(qp);
        norm = json{{"type", "qplate"}, {"q", qp.charge}, {"delta", qp.retardance}, {"alpha0", qp.axis_offset}};
      } else {
        ConfigReader::fail(field + ".type", "must be one of: qwp, hwp, waveplate, qplate");
      }
      e = std::move(norm);
    }
  }
  try {
    return StepSequence(std::move(out));
  } catch (const ValidationError& ex) {
    ConfigReader::fail(preset == "custom" ? "elements" : "q", ex.what());
  }
}

inline cplx read_complex(const json& v, const std::string& field) {
  if (v.is_array()) {
    if (v.size() != 2) ConfigReader::fail(field, "complex numbers are [re, im]");
    return {ConfigReader::to_number(v[0], field + "[0]"), ConfigReader::to_number(v[1], field + "[1]")};
  }
  return {ConfigReader::to_number(v, field), 0.0};
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// Coin as "L", "R", "H", "V" or [alpha, beta] with complex entries; must be normalized.
inline PolState read_coin(ConfigReader& r, const std::string& key) {
  json& v = r.raw(key);
  PolState c;
  const double h = 1.0 / std::sqrt(2.0);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "L") c = PolState::L();
    else if (s == "R") c = PolState::R();
    else if (s == "H") c = {h, h};
    else if (s == "V") c = {cplx(0, -h), cplx(0, h)};
    else ConfigReader::fail(key, "named coins are L, R, H, V");
  } else if (v.is_array() && v.size() == 2) {
    c = {read_complex(v[0], key + "[0]"), read_complex(v[1], key + "[1]")};
  } else {
    ConfigReader::fail(key, "expected a name or [alpha, beta]");
  }
  if (!c.is_normalized(1e-9))
    ConfigReader::fail(key, "|alpha|^2 + |beta|^2 must be 1 (got " + std::to_string(c.norm_sq()) + ")");
  v = json::array({complex_json(c.left), complex_json(c.right)});
  return c;
}

inline std::optional<OamWindow> read_window(ConfigReader& r, const std::string& key) {
  json& v = r.raw(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_array() || v.size() != 2) ConfigReader::fail(key, "expected null or [m_min, m_max]");
  const OamWindow w{static_cast<int>(ConfigReader::to_integer(v[0], key + "[0]")),
                    static_cast<int>(ConfigReader::to_integer(v[1], key + "[1]"))};
  if (w.max < w.min) ConfigReader::fail(key, "m_max < m_min");
  v = json::array({w.min, w.max});
  return w;
}

inline std::vector<double> read_number_list(ConfigReader& r, const std::string& key, bool allow_null) {
  json& v = r.raw(key);
  if (v.is_null() && allow_null) return {};
  if (!v.is_array() || v.empty()) ConfigReader::fail(key, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(ConfigReader::to_number(v[i], key + "[" + std::to_string(i) + "]"));
  v = json(out);
  return out;
}

inline std::vector<int> read_int_list(ConfigReader& r, const std::string& key) {
  json& v = r.raw(key);
  if (!v.is_array() || v.empty()) ConfigReader::fail(key, "expected a nonempty array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(static_cast<int>(ConfigReader::to_integer(v[i], key + "[" + std::to_string(i) + "]")));
  v = json(out);
  return out;
}

inline void validate_output(ConfigReader& r) {
  const std::string name = r.string("name");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos)
    ConfigReader::fail("name", "must be a nonempty file stem without path separators");
  r.string("output_dir");
}

}  // namespace twistwalk
