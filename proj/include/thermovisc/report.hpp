#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace thermovisc {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

/// One named PASS/FAIL check with the measured value, its threshold and the
/// relation the value must satisfy.
struct Check {
  enum class Rel { LE, GE, LT, GT };

  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Rel rel = Rel::LE;
  bool pass = false;
  std::string witness;

  static Check make(std::string name, double value, Rel rel, double threshold, std::string witness = {}) {
    Check c{std::move(name), value, threshold, rel, false, std::move(witness)};
    switch (rel) {
      case Rel::LE: c.pass = value <= threshold; break;
      case Rel::GE: c.pass = value >= threshold; break;
      case Rel::LT: c.pass = value < threshold; break;
      case Rel::GT: c.pass = value > threshold; break;
    }
    return c;
  }
  static Check flag(std::string name, bool ok, std::string witness = {}) {
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, Rel::GE, ok, std::move(witness)};
  }

  static const char* rel_text(Rel r) {
    switch (r) {
      case Rel::LE: return "<=";
      case Rel::GE: return ">=";
      case Rel::LT: return "<";
      case Rel::GT: return ">";
    }
    return "?";
  }
};

/// Ordered collection of checks plus informational key/value pairs.
struct Report {
  std::string title;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> info;

  void add(Check c) { checks.push_back(std::move(c)); }
  void note(const std::string& key, double v) { info.emplace_back(key, fmt17(v)); }
  void note(const std::string& key, std::string v) { info.emplace_back(key, std::move(v)); }
  void merge(const Report& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    info.insert(info.end(), other.info.begin(), other.info.end());
  }

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  std::vector<const Check*> failures() const {
    std::vector<const Check*> out;
    for (const auto& c : checks)
      if (!c.pass) out.push_back(&c);
    return out;
  }

  /// key: value lines; one line per check, then the info block.
  std::string to_text() const {
    std::string s;
    if (!title.empty()) s += "report: " + title + "\n";
    for (const auto& c : checks) {
      s += c.name + ": " + (c.pass ? "PASS" : "FAIL") + " value=" + fmt_short(c.value) + " " + Check::rel_text(c.rel) +
           " " + fmt_short(c.threshold);
      if (!c.witness.empty()) s += " witness=" + c.witness;
      s += "\n";
    }
    for (const auto& [k, v] : info) s += k + ": " + v + "\n";
    s += std::string("overall: ") + (all_pass() ? "PASS" : "FAIL") + "\n";
    return s;
  }
};

}  // namespace thermovisc
