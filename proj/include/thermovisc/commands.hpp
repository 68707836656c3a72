#pragma once

// Subcommands of the command-line tool. Each writes into its own output
// directory (resolved config, VERSION, CSVs, reports) and returns the exit
// code: 0 all checks pass, 2 configuration error, 3 solver error, 4 a check failed.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "certification.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "linear_sim.hpp"
#include "nonlinear_sim.hpp"
#include "report.hpp"

namespace thermovisc {

inline constexpr const char* kVersion = "thermovisc 1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitCheckFail = 4 };

struct RunSpec {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<double> eps_list;
  std::optional<double> alpha;
  int parallel = 1;
};

namespace io {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << fmt17(v[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

/// Creates the directory and writes config.resolved and VERSION.
inline void prepare(const fs::path& dir, const Material& m, const SimConfig& c) {
  fs::create_directories(dir);
  write_text(dir / "config.resolved", resolved_config(m, c));
  write_text(dir / "VERSION", std::string(kVersion) + "\n");
}

inline std::string step_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", k);
  return buf;
}

inline std::string eps_dir(double eps) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "eps_%g", eps);
  return buf;
}

inline void write_trajectory(const fs::path& dir, const Trajectory& tr) {
  Csv csv(dir / "trajectory.csv",
          {"t", "M", "Wcpl", "Win", "E_shifted", "diss_cum", "theta_min", "theta_max", "mech_iters", "heat_res"});
  for (const auto& r : tr.records)
    csv.row({r.t, r.energy.M, r.energy.Wcpl, r.energy.Win, r.energy.E_shifted, r.diss_cum, r.theta_min, r.theta_max,
             static_cast<double>(r.mech_iters), r.heat_res});
  Csv steps(dir / "steps.csv", {"step", "t", "phi_before", "phi_after", "descent_slack", "energy_residual",
                                "energy_bound", "full_residual", "diss_increment", "diss_cum", "mech_gnorm",
                                "heat_energy_res", "heat_iters", "heat_positive_offdiag", "theta_flat"});
  for (const auto& r : tr.records)
    steps.row({static_cast<double>(r.step), r.t, r.phi_before, r.phi_after, r.descent_slack, r.energy_residual,
               r.energy_bound, r.full_residual, r.diss_increment, r.diss_cum, r.mech_gnorm, r.heat_energy_res,
               static_cast<double>(r.heat_iters), static_cast<double>(r.heat_positive_offdiag), r.theta_flat});
}

inline void write_linear_trajectory(const fs::path& dir, const LinearTrajectory& tr) {
  Csv csv(dir / "trajectory.csv", {"t", "E0", "diss_cum", "mu_min", "mu_max"});
  for (const auto& r : tr.records) csv.row({r.t, r.E0, r.diss_cum, r.mu_min, r.mu_max});
  Csv steps(dir / "steps.csv", {"step", "t", "identity_residual", "identity_relative", "numerical_diss",
                                "diss_increment", "picard_iters", "mech_res", "heat_res"});
  for (const auto& r : tr.records)
    steps.row({static_cast<double>(r.step), r.t, r.identity_residual, r.identity_relative(), r.numerical_diss,
               r.diss_increment, static_cast<double>(r.picard_iters), r.mech_res, r.heat_res});
}

inline void write_positivity(const fs::path& dir, const PositivitySeries& s) {
  Csv csv(dir / "positivity.csv", {"t", "lambda", "theta_min", "G", "A1", "A2", "A3", "A4", "A5", "theta_flat"});
  for (std::size_t k = 0; k < s.t.size(); ++k)
    csv.row({s.t[k], s.lambda[k], s.theta_min[k], s.G[k], s.A1[k], s.A2[k], s.A3[k], s.A4[k], s.A5[k], s.theta_flat[k]});
}

/// Reads a CSV written by Csv into columns.
inline std::map<std::string, std::vector<double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string s;
    while (std::getline(ss, s, ',')) names.push_back(s);
  }
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string s;
    for (std::size_t i = 0; i < names.size() && std::getline(ss, s, ','); ++i) cols[names[i]].push_back(std::stod(s));
  }
  return cols;
}

}  // namespace io

/// Applies command-line overrides to a parsed configuration.
inline void apply_overrides(const RunSpec& run, ParsedConfig& pc) {
  if (run.alpha) {
    pc.material.alpha = *run.alpha;
    try {
      pc.material.check();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--alpha: ") + e.what());
    }
  }
  if (run.parallel < 1) throw ConfigError("--parallel must be >= 1");
}

// ---------------------------------------------------------------------------

inline Report validation_report(const Material& mat, const SimConfig& cfg) {
  CertificationOptions opt;
  opt.sample_budget = cfg.sample_budget;
  opt.seed = cfg.seed;
  Report r = validate_material(mat, opt);
  r.title = "validate";
  r.merge(derivative_suite(mat, opt));
  r.merge(psi_suite(mat, opt));
  r.merge(phi_beta_suite());
  r.note("validate.samples", static_cast<double>(opt.sample_budget));
  return r;
}

inline int cmd_validate(const RunSpec& run, std::ostream& log) {
  ParsedConfig pc = load_config(run.config_path);
  apply_overrides(run, pc);
  const io::fs::path out(run.out_dir);
  io::prepare(out, pc.material, pc.sim);
  const Report r = validation_report(pc.material, pc.sim);
  io::write_text(out / "validate.txt", r.to_text());
  log << "validate: " << r.checks.size() << " checks, " << r.failures().size() << " failed\n";
  for (const Check* c : r.failures()) log << "  FAIL " << c->name << " value=" << fmt_short(c->value) << "\n";
  return r.all_pass() ? kExitOk : kExitCheckFail;
}

inline void dump_states(const io::fs::path& dir, const Grid2& g, const std::vector<State>& states, int every) {
  if (every <= 0) return;
  io::fs::create_directories(dir / "fields");
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k % static_cast<std::size_t>(every) != 0 && k + 1 != states.size()) continue;
    const std::string n = io::step_name(static_cast<int>(k));
    write_field((dir / "fields" / ("y_" + n + ".txt")).string(), "y", g, states[k].y, 2);
    write_field((dir / "fields" / ("theta_" + n + ".txt")).string(), "theta", g, states[k].theta, 1);
  }
}

/// Certificates of one nonlinear trajectory.
inline Report nonlinear_report(const Trajectory& tr, const NonlinearSimulator& sim, PositivitySeries* series = nullptr) {
  Report r = energy_report(tr, sim);
  r.title = "simulate";
  PositivityCertificate pc = positivity_certificate(tr, sim);
  r.merge(pc.report);
  if (series) *series = pc.series;
  int offd = 0;
  for (const auto& rec : tr.records) offd = std::max(offd, rec.heat_positive_offdiag);
  r.note("heat.max_positive_offdiagonals", static_cast<double>(offd));
  const auto F = unpack_mat2(sim.ops().B * tr.states.back().y);
  const double korn = korn_ratio_sampled(F, sim.grid(), 100, sim.config().seed);
  r.add(Check::make("korn.sampled_ratio_final_state", korn, Check::Rel::LT, INFINITY));
  return r;
}

inline Report linear_report(const LinearTrajectory& tr) {
  Report r;
  r.title = "simulate-linear";
  double worst = 0.0;
  int at = 0;
  for (const auto& rec : tr.records)
    if (rec.identity_relative() > worst) worst = rec.identity_relative(), at = rec.step;
  r.add(Check::make("linear.energy_identity_relative", worst, Check::Rel::LE, 1e-8,
                    at_step(at, at * tr.dt)));
  return r;
}

inline int cmd_simulate(const RunSpec& run, std::ostream& log) {
  ParsedConfig pc = load_config(run.config_path);
  apply_overrides(run, pc);
  if (!run.eps_list.empty()) {
    if (run.eps_list.size() != 1) throw ConfigError("simulate accepts a single --eps value");
    pc.sim.eps = run.eps_list.front();
    pc.sim.check(pc.material);
  }
  const io::fs::path out(run.out_dir);
  io::prepare(out, pc.material, pc.sim);
  Report r;
  if (pc.sim.model == Model::Nonlinear) {
    const NonlinearSimulator sim(pc.sim, pc.material);
    const Trajectory tr = sim.run();
    io::write_trajectory(out, tr);
    dump_states(out, sim.grid(), tr.states, pc.sim.dump_every);
    PositivitySeries ps;
    r = nonlinear_report(tr, sim, &ps);
    io::write_positivity(out, ps);
  } else {
    const LinearSimulator sim(pc.sim, pc.material);
    const LinearTrajectory tr = sim.run();
    io::write_linear_trajectory(out, tr);
    if (pc.sim.dump_every > 0) {
      io::fs::create_directories(out / "fields");
      for (std::size_t k = 0; k < tr.states.size(); ++k) {
        if (k % static_cast<std::size_t>(pc.sim.dump_every) != 0 && k + 1 != tr.states.size()) continue;
        const std::string n = io::step_name(static_cast<int>(k));
        write_field((out / "fields" / ("u_" + n + ".txt")).string(), "u", sim.grid(), tr.states[k].u, 2);
        write_field((out / "fields" / ("mu_" + n + ".txt")).string(), "mu", sim.grid(), tr.states[k].mu, 1);
      }
    }
    r = linear_report(tr);
    r.note("linear.coupling", to_string(sim.coupling()));
  }
  io::write_text(out / "report.txt", r.to_text());
  log << "simulate: " << r.checks.size() << " checks, " << r.failures().size() << " failed\n";
  for (const Check* c : r.failures()) log << "  FAIL " << c->name << " value=" << fmt_short(c->value) << "\n";
  return r.all_pass() ? kExitOk : kExitCheckFail;
}

/// Runs jobs 0..n-1 on up to `parallel` threads; rethrows the first failure by index.
inline void run_parallel(int n, int parallel, const std::function<void(int)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(parallel, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SweepResult {
  Report report;
  std::vector<LinearizationError> errors;
  std::vector<ScalingQuantities> scalings;
};

/// Nonlinear runs over the eps ladder plus the linear reference.
inline SweepResult linearize_sweep(const Material& mat, const SimConfig& base, const std::vector<double>& eps_list,
                                   int parallel, const io::fs::path& out) {
  if (eps_list.size() < 2) throw ConfigError("linearize-sweep needs at least two eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("--eps values must be strictly decreasing");
  SimConfig lin_cfg = base;
  lin_cfg.model = Model::Linear;
  const LinearSimulator lin(lin_cfg, mat);
  const LinearTrajectory lt = lin.run();
  io::prepare(out / "linear", mat, lin_cfg);
  io::write_linear_trajectory(out / "linear", lt);

  SweepResult res;
  res.report.title = "linearize-sweep";
  res.report.merge(linear_report(lt));
  std::vector<Trajectory> trajs(eps_list.size());
  std::vector<Report> reports(eps_list.size());
  std::vector<ScalingQuantities> scal(eps_list.size());
  std::vector<LinearizationError> errs(eps_list.size());
  run_parallel(static_cast<int>(eps_list.size()), parallel, [&](int i) {
    SimConfig c = base;
    c.model = Model::Nonlinear;
    c.eps = eps_list[i];
    c.check(mat);
    const NonlinearSimulator sim(c, mat);
    const Trajectory tr = sim.run();
    const io::fs::path dir = out / io::eps_dir(c.eps);
    io::prepare(dir, mat, c);
    io::write_trajectory(dir, tr);
    reports[i] = energy_report(tr, sim);
    scal[i] = scaled_quantities(tr, sim.grid(), mat);
    errs[i] = linearization_error(tr, lt, sim.grid(), mat.theta_c, mat.alpha);
  });
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    Report r = reports[i];
    for (auto& c : r.checks) c.name = io::eps_dir(eps_list[i]) + "." + c.name;
    for (auto& kv : r.info) kv.first = io::eps_dir(eps_list[i]) + "." + kv.first;
    res.report.merge(r);
  }
  if (eps_list.size() >= 3) res.report.merge(apriori_scaling_report(scal, base.scaling_threshold));
  res.report.merge(linearization_report(errs));

  // Decoupled limit: the mechanics must not see the heat solver at all.
  if (!lin.mechanics_sees_temperature()) {
    const LinearTrajectory mech = lin.run_mechanics_only();
    double diff = 0.0;
    for (std::size_t k = 0; k < lt.states.size(); ++k)
      diff = std::max(diff, (lt.states[k].u - mech.states[k].u).lpNorm<Eigen::Infinity>());
    res.report.add(Check::make("decoupling.u_max_abs_difference", diff, Check::Rel::LE, 0.0));
  }

  io::Csv conv(out / "convergence.csv", {"eps", "u_H1_sup", "rate_L2", "mu_L2"});
  for (const auto& e : errs) conv.row({e.eps, e.u_H1_sup, e.rate_L2, e.mu_L2});
  io::Csv sc(out / "scaling.csv", {"eps", "energy", "deformation", "temperature", "dissipation", "strain_rate"});
  for (const auto& q : scal) sc.row({q.eps, q.energy, q.deformation, q.temperature, q.dissipation, q.strain_rate});
  io::write_text(out / "scaling.txt", res.report.to_text());
  res.errors = errs;
  res.scalings = scal;
  return res;
}

inline int cmd_linearize_sweep(const RunSpec& run, std::ostream& log) {
  ParsedConfig pc = load_config(run.config_path);
  apply_overrides(run, pc);
  const std::vector<double> eps = run.eps_list.empty() ? std::vector<double>{0.2, 0.1, 0.05} : run.eps_list;
  for (double e : eps)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("--eps values must lie in (0, 1]");
  const io::fs::path out(run.out_dir);
  io::prepare(out, pc.material, pc.sim);
  const SweepResult res = linearize_sweep(pc.material, pc.sim, eps, run.parallel, out);
  log << "linearize-sweep: " << res.report.checks.size() << " checks, " << res.report.failures().size()
      << " failed\n";
  for (const Check* c : res.report.failures()) log << "  FAIL " << c->name << " value=" << fmt_short(c->value) << "\n";
  return res.report.all_pass() ? kExitOk : kExitCheckFail;
}

/// Rebuilds a nonlinear trajectory from field dumps and steps.csv.
inline Trajectory load_dumped_trajectory(const io::fs::path& dir, const NonlinearSimulator& sim, bool* consecutive) {
  const io::fs::path fields = dir / "fields";
  if (!io::fs::is_directory(fields)) throw ConfigError("diagnose: no field dumps in " + fields.string());
  std::vector<int> steps;
  for (const auto& e : io::fs::directory_iterator(fields)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("y_", 0) == 0 && n.size() == 12) steps.push_back(std::stoi(n.substr(2, 6)));
  }
  std::sort(steps.begin(), steps.end());
  if (steps.empty()) throw ConfigError("diagnose: no deformation dumps in " + fields.string());
  const auto cols = io::read_csv(dir / "steps.csv");
  const Grid2& g = sim.grid();
  Trajectory tr;
  tr.nx = g.nx();
  tr.ny = g.ny();
  tr.dt = sim.tau();
  tr.eps = sim.config().eps;
  *consecutive = true;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int k = steps[i];
    if (i > 0 && k != steps[i - 1] + 1) *consecutive = false;
    const std::string n = io::step_name(k);
    const FieldDump y = read_field((fields / ("y_" + n + ".txt")).string());
    const FieldDump th = read_field((fields / ("theta_" + n + ".txt")).string());
    if (y.nx != g.nx() || y.ny != g.ny() || y.comps != 2 || th.nx != g.nx() || th.ny != g.ny() || th.comps != 1)
      throw ConfigError("diagnose: dump " + n + " does not match the configured grid");
    State s{y.values, th.values, k * sim.tau()};
    StepRecord rec = k == 0 ? sim.initial_record(s) : StepRecord{};
    rec.step = k;
    rec.t = s.t;
    rec.energy = integrate_energy(g, sim.ops(), s, sim.material(), sim.config().eps);
    rec.theta_min = s.theta.minCoeff();
    rec.theta_max = s.theta.maxCoeff();
    const std::size_t row = static_cast<std::size_t>(k);
    if (row < cols.at("step").size()) {
      rec.phi_before = cols.at("phi_before")[row];
      rec.phi_after = cols.at("phi_after")[row];
      rec.descent_slack = cols.at("descent_slack")[row];
      rec.energy_bound = cols.at("energy_bound")[row];
      rec.diss_cum = cols.at("diss_cum")[row];
      rec.theta_flat = cols.at("theta_flat")[row];
    }
    if (k > 0) rec.theta_flat = sim.boundary_temperature(s.t);
    tr.states.push_back(std::move(s));
    tr.records.push_back(rec);
  }
  if (steps.front() != 0) *consecutive = false;
  return tr;
}

inline int cmd_diagnose(const RunSpec& run, std::ostream& log) {
  ParsedConfig pc = load_config(run.config_path);
  apply_overrides(run, pc);
  const io::fs::path dir(run.out_dir);
  if (pc.sim.model != Model::Nonlinear) throw ConfigError("diagnose supports nonlinear trajectories only");
  const NonlinearSimulator sim(pc.sim, pc.material);
  bool consecutive = false;
  const Trajectory tr = load_dumped_trajectory(dir, sim, &consecutive);
  Report r;
  if (consecutive && tr.states.size() > 1) {
    r = nonlinear_report(tr, sim);
  } else {
    r.merge(positivity_certificate(tr, sim).report);
    const auto F = unpack_mat2(sim.ops().B * tr.states.back().y);
    const double korn = korn_ratio_sampled(F, sim.grid(), 100, sim.config().seed);
    r.add(Check::make("korn.sampled_ratio_final_state", korn, Check::Rel::LT, INFINITY));
    r.note("energy.skipped", "dumps are not consecutive steps");
  }
  r.title = "diagnose";
  r.note("diagnose.states", static_cast<double>(tr.states.size()));
  io::write_text(dir / "diagnose.txt", r.to_text());
  log << "diagnose: " << r.checks.size() << " checks, " << r.failures().size() << " failed\n";
  for (const Check* c : r.failures()) log << "  FAIL " << c->name << " value=" << fmt_short(c->value) << "\n";
  return r.all_pass() ? kExitOk : kExitCheckFail;
}

/// Dispatches a subcommand and maps errors to exit codes.
inline int run_command(const RunSpec& run, std::ostream& log, std::ostream& err) {
  try {
    if (run.command == "validate") return cmd_validate(run, log);
    if (run.command == "simulate") return cmd_simulate(run, log);
    if (run.command == "linearize-sweep") return cmd_linearize_sweep(run, log);
    if (run.command == "diagnose") return cmd_diagnose(run, log);
    err << "error: unknown command '" << run.command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InfeasibleStateError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const DomainError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace thermovisc
