#pragma once

// Plain-text configuration: one `key = value` per line, `#` starts a
// comment, lists are comma separated. Unknown keys, malformed values and
// violated invariants are errors carrying the offending line number.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "material.hpp"
#include "report.hpp"
#include "sim_config.hpp"

namespace thermovisc {

struct ParsedConfig {
  Material material;
  SimConfig sim;
  std::map<std::string, int> lines;  // key -> line where it was set
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& v, const std::string& key, int line) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (v.empty() || end != begin + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'", line);
  return x;
}

inline long long to_int(const std::string& v, const std::string& key, int line) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'", line);
  return x;
}

inline std::vector<double> to_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key, line));
  return out;
}

inline bool to_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'", line);
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

}  // namespace config_detail

/// Parses configuration text; every invariant is checked before returning.
inline ParsedConfig parse_config(const std::string& text) {
  using namespace config_detail;
  ParsedConfig pc;
  Material& m = pc.material;
  SimConfig& c = pc.sim;

  using Setter = std::function<void(const std::string&, const std::string&, int)>;
  auto dbl = [](double& ref) -> Setter {
    return [&ref](const std::string& v, const std::string& k, int l) { ref = to_double(v, k, l); };
  };
  auto integer = [](int& ref, long long lo, long long hi) -> Setter {
    return [&ref, lo, hi](const std::string& v, const std::string& k, int l) {
      const long long x = to_int(v, k, l);
      if (x < lo || x > hi)
        throw ConfigError(k + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", l);
      ref = static_cast<int>(x);
    };
  };
  auto series = [](TimeSeries& ref) -> Setter {
    return [&ref](const std::string& v, const std::string& k, int l) { ref.values = to_list(v, k, l); };
  };

  const std::map<std::string, Setter> setters = {
      {"theta_c", dbl(m.theta_c)},
      {"C1", dbl(m.C1)},
      {"p", integer(m.p, 2, 64)},
      {"q", integer(m.q, 2, 64)},
      {"kappa", dbl(m.kappa)},
      {"bump_amplitude", dbl(m.bump_amplitude)},
      {"bump_width", dbl(m.bump_width)},
      {"beta0", dbl(m.beta0)},
      {"alpha", dbl(m.alpha)},
      {"Lambda", dbl(m.Lambda)},
      {"kappa0", dbl(m.kappa0)},
      {"eta_K", dbl(m.eta_K)},
      {"eta_D", dbl(m.eta_D)},
      {"c_H", dbl(m.c_H)},
      {"nx", integer(c.nx, 4, 4096)},
      {"ny", integer(c.ny, 4, 4096)},
      {"dt", dbl(c.dt)},
      {"T", dbl(c.T)},
      {"eps", dbl(c.eps)},
      {"nu", dbl(c.nu)},
      {"model",
       [&c](const std::string& v, const std::string& k, int l) {
         if (v == "nonlinear") c.model = Model::Nonlinear;
         else if (v == "linear") c.model = Model::Linear;
         else throw ConfigError(k + ": expected nonlinear or linear, got '" + v + "'", l);
       }},
      {"coupling",
       [&c](const std::string& v, const std::string& k, int l) {
         if (v == "auto") c.coupling = Coupling::Auto;
         else if (v == "mech-first") c.coupling = Coupling::MechFirst;
         else if (v == "heat-first") c.coupling = Coupling::HeatFirst;
         else if (v == "picard") c.coupling = Coupling::Picard;
         else throw ConfigError(k + ": expected auto, mech-first, heat-first or picard, got '" + v + "'", l);
       }},
      {"load_scaling",
       [&c](const std::string& v, const std::string& k, int l) {
         if (v == "eps") c.scale_loads = true;
         else if (v == "none") c.scale_loads = false;
         else throw ConfigError(k + ": expected eps or none, got '" + v + "'", l);
       }},
      {"heat_enabled", [&c](const std::string& v, const std::string& k, int l) { c.heat_enabled = to_bool(v, k, l); }},
      {"u0_amp", dbl(c.u0_amp)},
      {"mu0_amp", dbl(c.mu0_amp)},
      {"flat_mode",
       [&c](const std::string& v, const std::string& k, int l) {
         if (v == "schedule") c.flat_mode = FlatMode::Schedule;
         else if (v == "exp") c.flat_mode = FlatMode::Exponential;
         else throw ConfigError(k + ": expected schedule or exp, got '" + v + "'", l);
       }},
      {"flat_amp", dbl(c.flat_amp)},
      {"flat_rate", dbl(c.flat_rate)},
      {"load_times",
       [&c](const std::string& v, const std::string& k, int l) { c.loads.times = to_list(v, k, l); }},
      {"f_x", series(c.loads.f_x)},
      {"f_y", series(c.loads.f_y)},
      {"g_x", series(c.loads.g_x)},
      {"g_y", series(c.loads.g_y)},
      {"mu_flat", series(c.loads.mu_flat)},
      {"mech_gtol", dbl(c.solver.mech_gtol)},
      {"mech_max_iter", integer(c.solver.mech_max_iter, 1, 100000)},
      {"det_floor", dbl(c.solver.det_floor)},
      {"lbfgs_memory", integer(c.solver.lbfgs_memory, 1, 100)},
      {"heat_tol", dbl(c.solver.heat_tol)},
      {"heat_max_iter", integer(c.solver.heat_max_iter, 1, 10000000)},
      {"lin_tol", dbl(c.solver.lin_tol)},
      {"picard_max", integer(c.solver.picard_max, 1, 1000)},
      {"picard_tol", dbl(c.solver.picard_tol)},
      {"dump_every", integer(c.dump_every, 0, 1000000000)},
      {"seed",
       [&c](const std::string& v, const std::string& k, int l) {
         const long long x = to_int(v, k, l);
         if (x < 0) throw ConfigError(k + " must be nonnegative", l);
         c.seed = static_cast<std::uint64_t>(x);
       }},
      {"sample_budget", integer(c.sample_budget, 1, 100000000)},
      {"scaling_threshold", dbl(c.scaling_threshold)},
  };

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (pc.lines.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    it->second(value, key, line);
    pc.lines[key] = line;
  }

  // Invariant violations are attributed to the key that opens the message.
  auto attribute = [&](const ConfigError& e) {
    if (e.line() > 0) throw e;
    const std::string msg = e.what();
    const std::string first = msg.substr(0, msg.find_first_of(" :"));
    const auto it = pc.lines.find(first);
    throw ConfigError(msg, it == pc.lines.end() ? 0 : it->second);
  };
  try {
    m.check();
    c.check(m);
  } catch (const ConfigError& e) {
    attribute(e);
  }
  return pc;
}

inline ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Every key with its effective value, in a fixed order; parses back to the same configuration.
inline std::string resolved_config(const Material& m, const SimConfig& c) {
  using config_detail::join;
  std::string s;
  auto kv = [&s](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  auto d = [&kv](const std::string& k, double v) { kv(k, fmt17(v)); };
  auto i = [&kv](const std::string& k, long long v) { kv(k, std::to_string(v)); };
  s += "# material\n";
  d("theta_c", m.theta_c);
  d("C1", m.C1);
  i("p", m.p);
  i("q", m.q);
  d("kappa", m.kappa);
  d("bump_amplitude", m.bump_amplitude);
  d("bump_width", m.bump_width);
  d("beta0", m.beta0);
  d("alpha", m.alpha);
  d("Lambda", m.Lambda);
  d("kappa0", m.kappa0);
  d("eta_K", m.eta_K);
  d("eta_D", m.eta_D);
  d("c_H", m.c_H);
  s += "# run\n";
  i("nx", c.nx);
  i("ny", c.ny);
  d("dt", c.dt);
  d("T", c.T);
  d("eps", c.eps);
  d("nu", c.nu);
  kv("model", to_string(c.model));
  kv("coupling", to_string(c.coupling));
  kv("load_scaling", c.scale_loads ? "eps" : "none");
  kv("heat_enabled", c.heat_enabled ? "true" : "false");
  d("u0_amp", c.u0_amp);
  d("mu0_amp", c.mu0_amp);
  kv("flat_mode", to_string(c.flat_mode));
  d("flat_amp", c.flat_amp);
  d("flat_rate", c.flat_rate);
  s += "# loads\n";
  kv("load_times", join(c.loads.times));
  kv("f_x", join(c.loads.f_x.values));
  kv("f_y", join(c.loads.f_y.values));
  kv("g_x", join(c.loads.g_x.values));
  kv("g_y", join(c.loads.g_y.values));
  kv("mu_flat", join(c.loads.mu_flat.values));
  s += "# solver\n";
  d("mech_gtol", c.solver.mech_gtol);
  i("mech_max_iter", c.solver.mech_max_iter);
  d("det_floor", c.solver.det_floor);
  i("lbfgs_memory", c.solver.lbfgs_memory);
  d("heat_tol", c.solver.heat_tol);
  i("heat_max_iter", c.solver.heat_max_iter);
  d("lin_tol", c.solver.lin_tol);
  i("picard_max", c.solver.picard_max);
  d("picard_tol", c.solver.picard_tol);
  s += "# output and checks\n";
  i("dump_every", c.dump_every);
  i("seed", static_cast<long long>(c.seed));
  i("sample_budget", c.sample_budget);
  d("scaling_threshold", c.scaling_threshold);
  return s;
}

}  // namespace thermovisc
