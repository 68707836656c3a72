// End-to-end acceptance run: drives the CLI on the shipped configurations and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thermovisc/commands.hpp"

namespace fs = std::filesystem;
using namespace thermovisc;

namespace {

fs::path g_out;
const fs::path g_configs = THERMOVISC_CONFIG_DIR;

struct Run {
  int rc = -1;
  double seconds = 0.0;
};

Run cli(const std::string& args, const std::string& log_name) {
  const std::string cmd =
      std::string(THERMOVISC_CLI_PATH) + " " + args + " > " + (g_out / (log_name + ".log")).string() + " 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, s};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A parsed report.txt: check name -> (pass, value), info key -> text.
struct ParsedReport {
  std::map<std::string, std::pair<bool, double>> checks;
  std::map<std::string, std::string> info;
  bool has(const std::string& k) const { return checks.count(k) > 0; }
  bool pass(const std::string& k) const { return has(k) && checks.at(k).first; }
  double value(const std::string& k) const { return has(k) ? checks.at(k).second : NAN; }
};

ParsedReport parse_report(const fs::path& p) {
  ParsedReport r;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon), rest = line.substr(colon + 2);
    if (key == "overall") continue;
    if (rest.rfind("PASS", 0) == 0 || rest.rfind("FAIL", 0) == 0) {
      const auto v = rest.find("value=");
      const double value = v == std::string::npos ? NAN : std::strtod(rest.c_str() + v + 6, nullptr);
      r.checks[key] = {rest[0] == 'P', value};
    } else {
      r.info[key] = rest;
    }
  }
  return r;
}

std::map<std::string, std::vector<double>> read_csv(const fs::path& p) {
  try {
    return io::read_csv(p);
  } catch (const std::exception&) {
    return {};
  }
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void info(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* diff) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) {
      *diff = rel.string();
      return false;
    }
    ++n;
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) {
      *diff = fs::relative(e.path(), b).string();
      return false;
    }
  return n > 0;
}

std::ofstream g_summary;

void say(const std::string& line) {
  std::cout << line << std::endl;
  g_summary << line << "\n";
}

void emit(int id, const std::string& title, const Verdict& v, int* failures) {
  std::string line = "criterion " + std::to_string(id) + " " + (v.pass ? "PASS" : "FAIL") + ": " + title;
  for (const auto& n : v.notes) line += "; " + n;
  say(line);
  if (!v.pass) ++*failures;
}

void energy_checks(Verdict& v, const ParsedReport& r, const std::string& prefix, const std::string& where) {
  for (const char* k : {"energy.descent_slack", "energy.balance_residual_over_bound"})
    v.require(r.pass(prefix + k), where + " " + k + " = " + fmt(r.value(prefix + k)));
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "thermovisc_acceptance";
  fs::remove_all(g_out);
  fs::create_directories(g_out);
  g_summary.open(g_out / "summary.txt");
  const std::string cfg = (g_configs / "defaults.cfg").string();
  int failures = 0;
  double sweep_seconds = 0.0;

  // 1 and 2: material certification and smooth positive part.
  const Run val = cli("validate --config " + cfg + " --out " + (g_out / "validate").string(), "validate");
  const ParsedReport vr = parse_report(g_out / "validate" / "validate.txt");
  {
    Verdict v;
    v.require(val.rc == 0, "validate exit code " + std::to_string(val.rc));
    v.require(val.seconds <= 30.0, "runtime " + fmt(val.seconds) + " s > 30 s");
    const double samples = vr.info.count("validate.samples") ? std::stod(vr.info.at("validate.samples")) : 0.0;
    v.require(samples >= 1e4, "samples " + fmt(samples));
    int families = 0, fd = 0;
    for (const auto& [name, pv] : vr.checks) {
      if (!pv.first) v.require(false, name);
      for (const char* f : {"elastic.", "hyper.", "coupling.", "dissipation."})
        if (name.rfind(f, 0) == 0) ++families;
      if (name.rfind("fd.", 0) == 0) {
        ++fd;
        v.require(pv.second <= 1e-6, name + " relative error " + fmt(pv.second));
      }
    }
    v.require(families >= 20 && fd >= 10, "missing checks");
    for (const char* k : {"dissipation.xi_equals_2R", "psi.roundtrip_theta", "psi.roundtrip_w"})
      v.require(vr.pass(k) && vr.value(k) <= 1e-10, std::string(k) + " = " + fmt(vr.value(k)));
    v.info(std::to_string(vr.checks.size()) + " checks on " + fmt(samples) + " samples in " + fmt(val.seconds) + " s");
    emit(1, "constitutive certification", v, &failures);
  }
  {
    Verdict v;
    const double pts = vr.info.count("phi_beta.grid_points") ? std::stod(vr.info.at("phi_beta.grid_points")) : 0.0;
    v.require(pts >= 1000, "grid points " + fmt(pts));
    for (const char* k : {"phi_beta.phi_le_dphi_s", "phi_beta.dphi_s_le_4phi", "phi_beta.d2phi_s_le_3dphi",
                          "phi_beta.phi_le_pos_part"})
      v.require(vr.pass(k) && vr.value(k) == 0.0, std::string(k) + " violations " + fmt(vr.value(k)));
    v.info(fmt(pts) + " grid points, zero violations required");
    emit(2, "smooth positive part inequalities", v, &failures);
  }

  // 3 and 5: positivity run.
  const fs::path pos = g_out / "positivity";
  const Run pr = cli("simulate --config " + (g_configs / "positivity.cfg").string() + " --out " + pos.string(),
                     "positivity");
  const ParsedReport prep = parse_report(pos / "report.txt");
  const auto pcsv = read_csv(pos / "positivity.csv");
  {
    Verdict v;
    v.require(pr.rc == 0, "simulate exit code " + std::to_string(pr.rc));
    v.require(pr.seconds <= 300.0, "runtime " + fmt(pr.seconds) + " s > 300 s");
    for (const char* k : {"positivity.theta_min", "positivity.C_hat_finite", "positivity.floor_gap",
                          "positivity.G_max", "positivity.G_increase"})
      v.require(prep.pass(k), k);
    bool g_zero = pcsv.count("G") && pcsv.at("G").size() == 1001;
    if (g_zero)
      for (double x : pcsv.at("G")) g_zero = g_zero && x == 0.0;
    v.require(g_zero, "G not identically zero over 1001 states");
    bool positive = pcsv.count("theta_min") > 0;
    if (positive)
      for (double x : pcsv.at("theta_min")) positive = positive && x > 0.0;
    v.require(positive, "nodal temperature not positive");
    v.info("C_hat = " + (prep.info.count("positivity.C_hat") ? prep.info.at("positivity.C_hat") : "?") +
           ", min theta = " + fmt(prep.value("positivity.theta_min")) + ", " + fmt(pr.seconds) + " s");
    emit(3, "temperature positivity with exponential floor", v, &failures);
  }

  // 6 and 7: eps ladder for alpha in {1, 1.5, 2}.
  std::map<std::string, ParsedReport> sweeps;
  std::map<std::string, int> sweep_rc;
  for (const char* alpha : {"1", "1.5", "2"}) {
    const fs::path dir = g_out / (std::string("sweep_alpha_") + alpha);
    const Run r = cli("linearize-sweep --config " + (g_configs / "sweep.cfg").string() + " --out " + dir.string() +
                          " --eps 0.2,0.1,0.05 --alpha " + alpha,
                      std::string("sweep_alpha_") + alpha);
    sweep_seconds += r.seconds;
    sweeps[alpha] = parse_report(dir / "scaling.txt");
    sweep_rc[alpha] = r.rc;
  }
  const fs::path dec = g_out / "decoupling";
  const Run dr = cli("linearize-sweep --config " + (g_configs / "decoupling.cfg").string() + " --out " + dec.string() +
                         " --eps 0.2,0.1,0.05",
                     "decoupling");
  const ParsedReport drep = parse_report(dec / "scaling.txt");

  {
    Verdict v;
    for (const auto& [name, r] : prep.checks)
      if (name.rfind("energy.", 0) == 0) v.require(r.first, "positivity run " + name);
    energy_checks(v, prep, "", "positivity run");
    for (const auto& [alpha, r] : sweeps)
      for (const char* e : {"eps_0.2.", "eps_0.1.", "eps_0.05."}) energy_checks(v, r, e, "alpha " + alpha + " " + e);
    for (const char* e : {"eps_0.2.", "eps_0.1.", "eps_0.05."}) energy_checks(v, drep, e, std::string("decoupling ") + e);
    double worst = 0.0;
    for (const auto& [alpha, r] : sweeps)
      for (const char* e : {"eps_0.2.", "eps_0.1.", "eps_0.05."})
        worst = std::max(worst, r.value(std::string(e) + "energy.balance_residual_over_bound"));
    worst = std::max(worst, prep.value("energy.balance_residual_over_bound"));
    v.info("worst residual/bound " + fmt(worst) + " over 13 nonlinear runs");
    emit(4, "discrete energy accounting", v, &failures);
  }
  {
    Verdict v;
    v.require(prep.pass("positivity.A2_max"), "A2 max " + fmt(prep.value("positivity.A2_max")));
    v.require(prep.pass("positivity.A3_max_when_flat_above_lambda"),
              "A3 max " + fmt(prep.value("positivity.A3_max_when_flat_above_lambda")));
    bool a2 = pcsv.count("A2") > 0;
    if (a2)
      for (double x : pcsv.at("A2")) a2 = a2 && x <= 0.0;
    v.require(a2, "A2 positive at some step");
    int a3_steps = 0;
    bool a3 = pcsv.count("A3") > 0;
    if (a3)
      for (std::size_t k = 1; k < pcsv.at("A3").size(); ++k)
        if (pcsv.at("theta_flat")[k] >= pcsv.at("lambda")[k]) {
          ++a3_steps;
          a3 = a3 && pcsv.at("A3")[k] <= 0.0;
        }
    v.require(a3, "A3 positive where the boundary temperature is above the floor");
    v.info("A3 checked at " + std::to_string(a3_steps) + " steps");
    emit(5, "A-term signs on the positivity run", v, &failures);
  }
  {
    Verdict v;
    v.require(sweep_seconds <= 900.0, "sweep runtime " + fmt(sweep_seconds) + " s > 900 s");
    double worst = 0.0;
    for (const auto& [alpha, r] : sweeps)
      for (const char* k : {"scaling.energy_over_eps2.max_over_min", "scaling.deformation_H1_over_eps.max_over_min",
                            "scaling.temperature_over_eps_alpha.max_over_min",
                            "scaling.dissipation_over_eps2.max_over_min", "scaling.strain_rate_over_eps.max_over_min"}) {
        v.require(r.pass(k), "alpha " + alpha + " " + k + " = " + fmt(r.value(k)));
        worst = std::max(worst, r.value(k));
      }
    v.info("worst max/min " + fmt(worst) + ", three sweeps in " + fmt(sweep_seconds) + " s");
    emit(6, "a-priori scalings", v, &failures);
  }
  {
    Verdict v;
    double worst = INFINITY;
    for (const auto& [alpha, r] : sweeps) {
      v.require(sweep_rc[alpha] == 0, "alpha " + alpha + " sweep exit code " + std::to_string(sweep_rc[alpha]));
      for (const char* k : {"linearization.u_H1_sup.min_reduction", "linearization.rate_L2.min_reduction",
                            "linearization.mu_L2.min_reduction"}) {
        v.require(r.pass(k), "alpha " + alpha + " " + k + " = " + fmt(r.value(k)));
        worst = std::min(worst, r.value(k));
      }
    }
    v.require(drep.pass("decoupling.u_max_abs_difference"),
              "decoupling difference " + fmt(drep.value("decoupling.u_max_abs_difference")));
    v.info("smallest reduction per halving " + fmt(worst) + ", decoupling difference " +
           fmt(drep.value("decoupling.u_max_abs_difference")) + " (exit " + std::to_string(dr.rc) + ")");
    emit(7, "small-strain linearization", v, &failures);
  }

  // 8: manufactured solutions and the discrete identity of the linear model.
  {
    Verdict v;
    for (double alpha : {1.0, 2.0}) {
      Material m;
      m.beta0 = 1.0;
      m.alpha = alpha;
      std::vector<ManufacturedErrors> e;
      for (int n : {16, 32, 64}) e.push_back(manufactured_errors(n, 0.2, 0.05, m));
      for (std::size_t i = 1; i < e.size(); ++i) {
        const double ou = std::log2(e[i - 1].u_l2 / e[i].u_l2), om = std::log2(e[i - 1].mu_l2 / e[i].mu_l2);
        v.require(ou >= 1.8 && om >= 1.8, "alpha " + fmt(alpha) + " orders " + fmt(ou) + ", " + fmt(om));
        if (i + 1 == e.size()) v.info("alpha " + fmt(alpha) + " orders u " + fmt(ou) + " mu " + fmt(om));
      }
      for (const auto& x : e)
        v.require(x.max_identity_relative <= 1e-8, "manufactured identity " + fmt(x.max_identity_relative));
    }
    const Run lr = cli("simulate --config " + (g_configs / "linear.cfg").string() + " --out " +
                           (g_out / "linear").string(),
                       "linear");
    const ParsedReport l = parse_report(g_out / "linear" / "report.txt");
    v.require(lr.rc == 0 && l.pass("linear.energy_identity_relative"),
              "linear identity " + fmt(l.value("linear.energy_identity_relative")));
    for (const auto& [alpha, r] : sweeps)
      v.require(r.pass("linear.energy_identity_relative"), "sweep alpha " + alpha + " linear identity");
    v.info("linear identity " + fmt(l.value("linear.energy_identity_relative")));
    emit(8, "linear solver verification", v, &failures);
  }

  // 9: repeated commands give byte-identical outputs.
  {
    Verdict v;
    std::string diff;
    const Run v2 = cli("validate --config " + cfg + " --out " + (g_out / "validate_again").string(), "validate_again");
    v.require(v2.rc == val.rc && same_tree(g_out / "validate", g_out / "validate_again", &diff), "validate " + diff);
    const Run l2 = cli("simulate --config " + (g_configs / "linear.cfg").string() + " --out " +
                           (g_out / "linear_again").string(),
                       "linear_again");
    v.require(l2.rc == 0 && same_tree(g_out / "linear", g_out / "linear_again", &diff), "linear simulate " + diff);
    const Run s1 = cli("simulate --config " + (g_configs / "demo.cfg").string() + " --out " +
                           (g_out / "demo").string(),
                       "demo");
    const Run s2 = cli("simulate --config " + (g_configs / "demo.cfg").string() + " --out " +
                           (g_out / "demo_again").string(),
                       "demo_again");
    v.require(s1.rc == 0 && s2.rc == 0, "demo exit codes " + std::to_string(s1.rc) + ", " + std::to_string(s2.rc));
    const Run d1 = cli("diagnose --config " + (g_configs / "demo.cfg").string() + " --out " +
                           (g_out / "demo").string(),
                       "diagnose");
    const Run d2 = cli("diagnose --config " + (g_configs / "demo.cfg").string() + " --out " +
                           (g_out / "demo_again").string(),
                       "diagnose_again");
    v.require(d1.rc == 0 && d2.rc == 0, "diagnose exit codes " + std::to_string(d1.rc) + ", " + std::to_string(d2.rc));
    v.require(same_tree(g_out / "demo", g_out / "demo_again", &diff), "simulate and diagnose " + diff);
    const Run p = cli("linearize-sweep --config " + (g_configs / "sweep.cfg").string() + " --out " +
                          (g_out / "sweep_alpha_2_parallel").string() + " --eps 0.2,0.1,0.05 --alpha 2 --parallel 3",
                      "sweep_parallel");
    v.require(p.rc == sweep_rc["2"] && same_tree(g_out / "sweep_alpha_2", g_out / "sweep_alpha_2_parallel", &diff),
              "parallel sweep " + diff);
    v.info("validate, simulate (linear and nonlinear), diagnose, serial vs parallel sweep");
    emit(9, "determinism", v, &failures);
  }

  say("acceptance: " + std::to_string(9 - failures) + "/9 criteria pass");
  return failures == 0 ? 0 : 1;
}
