#pragma once

// Certificates computed from stored trajectories: energy accounting,
// temperature floors with the A1..A5 decomposition, the smoothed
// negative-part functional, a-priori scalings in eps, nonlinear versus
// linear errors, and Korn ratios.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "grid.hpp"
#include "linear_sim.hpp"
#include "nonlinear_sim.hpp"
#include "report.hpp"

namespace thermovisc {

inline std::string at_step(int k, double t) { return "step " + std::to_string(k) + " t=" + fmt_short(t); }

// ---------------------------------------------------------------------------
// Energy accounting

struct EnergyBalanceSeries {
  std::vector<double> residual;        // recomputed mechanical identity residual
  std::vector<double> bound;           // 10 (optimizer tol + heat tol) in energy units
  std::vector<double> full_residual;   // with the exact increment of M
  std::vector<double> first_law;       // total-energy residual
  std::vector<double> descent_slack;   // (Phi_after - Phi_before) / (1 + |Phi_before|)
  double max_ratio = 0.0;              // max |residual| / bound
  int worst_step = 0;
  double max_descent_slack = -std::numeric_limits<double>::infinity();
  int worst_descent_step = 0;
  double diss_requadrature = 0.0;      // independent Sum tau int xi
  double diss_recorded = 0.0;
};

inline EnergyBalanceSeries energy_balance_residual(const Trajectory& tr, const NonlinearSimulator& sim) {
  EnergyBalanceSeries s;
  const Grid2& g = sim.grid();
  const Material& mat = sim.material();
  const double tau = sim.tau();
  const Vector bl = mat.kappa * boundary_lumped_length(g);
  KahanSum diss;
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    const State& prev = tr.states[k - 1];
    const State& cur = tr.states[k];
    const StepRecord& rec = tr.records[k];
    const FrozenState fp = sim.freeze(prev);
    const EnergyIdentity ei = sim.energy_identity(prev, fp, cur.y, cur.t);
    const double r = ei.residual();
    s.residual.push_back(r);
    s.bound.push_back(rec.energy_bound);
    s.full_residual.push_back(ei.full_residual());
    const double ratio = rec.energy_bound > 0.0 ? std::fabs(r) / rec.energy_bound : (r == 0.0 ? 0.0 : INFINITY);
    if (ratio > s.max_ratio || k == 1) {
      s.max_ratio = ratio;
      s.worst_step = static_cast<int>(k);
    }
    const double slack = rec.descent_slack / (1.0 + std::fabs(rec.phi_before));
    s.descent_slack.push_back(slack);
    if (slack > s.max_descent_slack) {
      s.max_descent_slack = slack;
      s.worst_descent_step = static_cast<int>(k);
    }
    // First law: d[M + int W_in] = <l, dy> + tau kappa int_Gamma (theta_flat - theta).
    const double dE = (rec.energy.M + rec.energy.Win) - (tr.records[k - 1].energy.M + tr.records[k - 1].energy.Win);
    const double flux = tau * (bl.array() * (rec.theta_flat - cur.theta.array())).sum();
    s.first_law.push_back(dE - ei.load_work - flux);
    diss.add(ei.dissipation);
  }
  if (s.descent_slack.empty()) s.max_descent_slack = 0.0;
  s.diss_requadrature = diss.value();
  s.diss_recorded = tr.records.empty() ? 0.0 : tr.records.back().diss_cum;
  return s;
}

inline Report energy_report(const Trajectory& tr, const NonlinearSimulator& sim) {
  const EnergyBalanceSeries s = energy_balance_residual(tr, sim);
  Report r;
  r.title = "energy";
  r.add(Check::make("energy.descent_slack", s.max_descent_slack, Check::Rel::LE, 1e-10,
                    at_step(s.worst_descent_step, s.worst_descent_step * sim.tau())));
  r.add(Check::make("energy.balance_residual_over_bound", s.max_ratio, Check::Rel::LE, 1.0,
                    at_step(s.worst_step, s.worst_step * sim.tau())));
  const double dd = std::fabs(s.diss_requadrature - s.diss_recorded) / std::max(1.0, std::fabs(s.diss_recorded));
  r.add(Check::make("energy.dissipation_requadrature", dd, Check::Rel::LE, 1e-12));
  double full = 0.0, first = 0.0;
  for (double x : s.full_residual) full = std::max(full, std::fabs(x));
  for (double x : s.first_law) first = std::max(first, std::fabs(x));
  r.note("energy.max_full_increment_residual", full);
  r.note("energy.max_first_law_residual", first);
  r.note("energy.total_dissipation", s.diss_recorded);
  return r;
}

// ---------------------------------------------------------------------------
// Positivity

struct PositivitySeries {
  std::vector<double> t, lambda, theta_min, G, A1, A2, A3, A4, A5, theta_flat;
};

/// Fitted floor rate C_hat = max_k max(0, -log(min theta_k / lambda0) / t_k).
inline double fitted_floor_rate(const Trajectory& tr, double lambda0) {
  double c = 0.0;
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    const double m = tr.states[k].theta.minCoeff();
    if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
    c = std::max(c, -std::log(m / lambda0) / tr.states[k].t);
  }
  return c;
}

/// Deformation gradient and second gradient of y at a reference point (s, t) of a cell.
inline Mat2 cell_gradient(const Grid2& g, const Vector& y, int cell, double s, double t) {
  const auto nodes = g.cell_nodes(cell);
  const std::array<double, 4> ds{-(1 - t), (1 - t), -t, t};
  const std::array<double, 4> dt{-(1 - s), -s, (1 - s), s};
  Mat2 F;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 2; ++c) {
      F(c, 0) += y[2 * nodes[a] + c] * ds[a] / g.hx();
      F(c, 1) += y[2 * nodes[a] + c] * dt[a] / g.hy();
    }
  return F;
}

inline PositivitySeries positivity_series(const Trajectory& tr, const NonlinearSimulator& sim, double lambda0,
                                          double Dtilde) {
  const Grid2& g = sim.grid();
  const GridOperators& ops = sim.ops();
  const Material& mat = sim.material();
  const SimConfig& cfg = sim.config();
  const double tau = sim.tau(), w = g.qp_weight(), gp = 0.5 / std::sqrt(3.0);
  const Vector lumped = lumped_integral(g, [](int) { return 1.0; });
  PositivitySeries s;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const State& st = tr.states[k];
    const double lam = lambda0 * std::exp(-Dtilde * st.t);
    const auto F = unpack_mat2(ops.B * st.y);
    const auto G = unpack_gradient3(ops.Hs * st.y);
    const auto th = values_at_qp(g, st.theta);
    const auto dth = scalar_gradient_at_qp(g, st.theta);
    std::vector<Mat2> Fprev = k ? unpack_mat2(ops.B * tr.states[k - 1].y) : F;
    KahanSum Gs, a1, a2, a4, a5;
    for (int q = 0; q < g.num_qp(); ++q) {
      const double neg = std::max(0.0, lam - th[q]);
      const double thq = std::max(th[q], 0.0);
      const HeatCapacity hc = heat_capacity_derivatives(mat, F[q], thq, cfg.eps);
      const Mat2 Kc = conductivity(mat, F[q], thq);
      const double flux = dot(dth[q], Kc * dth[q]);
      if (th[q] <= lam) a2.add(-w * flux / hc.cV);
      if (neg > 0.0) {
        Vec2 grad_inv;
        for (int kk = 0; kk < 2; ++kk)
          grad_inv.v[kk] = -(ddot(hc.dF, G[q].slice[kk]) + hc.dtheta * dth[q][kk]) / (hc.cV * hc.cV);
        a4.add(w * neg * dot(Kc * dth[q], grad_inv));
        const Mat2 rate = k ? (1.0 / (st.t - tr.states[k - 1].t)) * (F[q] - Fprev[q]) : Mat2::zero();
        const double xi = dissipation(mat, F[q], rate, thq).xi;
        const double xreg = regularize_xi(truncate_xi(xi, mat.alpha, mat.Lambda), mat.alpha, cfg.nu);
        const Mat2 dW = internal_energy_dF(mat, F[q], thq, cfg.eps) - coupling_dF(mat, F[q], thq, cfg.eps);
        a5.add(w * (ddot(dW, rate) - xreg) * neg / hc.cV);
      }
    }
    // G and A1 with the nodal (lumped) quadrature of the heat step.
    for (int n = 0; n < g.num_nodes(); ++n) {
      const double neg = std::max(0.0, lam - st.theta[n]);
      Gs.add(lumped[n] * 0.5 * neg * neg);
      a1.add(-lumped[n] * neg * Dtilde * lam);
    }
    // Boundary term with 2-point Gauss on every edge.
    const double flat = k ? tr.records[k].theta_flat : sim.boundary_temperature(0.5 * tau);
    KahanSum a3;
    for (const auto& e : g.boundary_edges()) {
      const Vec2 x0 = g.position(e.n0), x1 = g.position(e.n1);
      const Vec2 mid = 0.5 * (x0 + x1);
      const int ci = std::min(static_cast<int>(mid[0] / g.hx()), g.nx() - 1);
      const int cj = std::min(static_cast<int>(mid[1] / g.hy()), g.ny() - 1);
      const int cell = cj * g.nx() + ci;
      for (double r : {0.5 - gp, 0.5 + gp}) {
        const Vec2 x = (1.0 - r) * x0 + r * x1;
        const double thx = (1.0 - r) * st.theta[e.n0] + r * st.theta[e.n1];
        const double neg = std::max(0.0, lam - thx);
        if (neg == 0.0) continue;
        const Mat2 Fx = cell_gradient(g, st.y, cell, x[0] / g.hx() - ci, x[1] / g.hy() - cj);
        const double cv = heat_capacity(mat, Fx, std::max(thx, 0.0), cfg.eps);
        a3.add(0.5 * e.length * mat.kappa * (thx - flat) * neg / cv);
      }
    }
    s.t.push_back(st.t);
    s.lambda.push_back(lam);
    s.theta_min.push_back(st.theta.minCoeff());
    s.G.push_back(Gs.value());
    s.A1.push_back(a1.value());
    s.A2.push_back(a2.value());
    s.A3.push_back(a3.value());
    s.A4.push_back(a4.value());
    s.A5.push_back(a5.value());
    s.theta_flat.push_back(flat);
  }
  return s;
}

struct PositivityCertificate {
  Report report;
  PositivitySeries series;
  double C_hat = 0.0;
  double lambda0 = 0.0;
};

/// Floors with lambda0 = min theta_0 and D_tilde = 2 C_hat unless given.
inline PositivityCertificate positivity_certificate(const Trajectory& tr, const NonlinearSimulator& sim,
                                                    double Dtilde = -1.0) {
  PositivityCertificate pc;
  pc.lambda0 = tr.states.front().theta.minCoeff();
  pc.C_hat = fitted_floor_rate(tr, pc.lambda0);
  if (Dtilde < 0.0) Dtilde = 2.0 * pc.C_hat;
  pc.series = positivity_series(tr, sim, pc.lambda0, Dtilde);
  const auto& s = pc.series;
  Report& r = pc.report;
  r.title = "positivity";

  double tmin = INFINITY, floor_gap = INFINITY, Gmax = 0.0, Ginc = 0.0, a1max = -INFINITY, a2max = -INFINITY,
         a3max = -INFINITY;
  int at_t = 0, at_floor = 0, at_G = 0, at_a2 = 0, at_a3 = 0, a3_checked = 0;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    if (s.theta_min[k] < tmin) tmin = s.theta_min[k], at_t = static_cast<int>(k);
    const double gap = s.theta_min[k] - pc.lambda0 * std::exp(-pc.C_hat * s.t[k]);
    if (gap < floor_gap) floor_gap = gap, at_floor = static_cast<int>(k);
    if (s.G[k] > Gmax) Gmax = s.G[k], at_G = static_cast<int>(k);
    if (k) Ginc = std::max(Ginc, s.G[k] - s.G[k - 1]);
    a1max = std::max(a1max, s.A1[k]);
    if (s.A2[k] > a2max) a2max = s.A2[k], at_a2 = static_cast<int>(k);
    if (k && s.theta_flat[k] >= s.lambda[k]) {
      ++a3_checked;
      if (s.A3[k] > a3max) a3max = s.A3[k], at_a3 = static_cast<int>(k);
    }
  }
  if (a3_checked == 0) a3max = 0.0;
  auto w = [&](std::size_t k) { return at_step(tr.records[k].step, s.t[k]); };
  r.add(Check::make("positivity.theta_min", tmin, Check::Rel::GT, 0.0, w(at_t)));
  r.add(Check::make("positivity.C_hat_finite", std::isfinite(pc.C_hat) ? pc.C_hat : INFINITY, Check::Rel::LT, INFINITY));
  r.add(Check::make("positivity.floor_gap", floor_gap, Check::Rel::GE, 0.0, w(at_floor)));
  r.add(Check::make("positivity.G_max", Gmax, Check::Rel::LE, 0.0, w(at_G)));
  r.add(Check::make("positivity.G_increase", Ginc, Check::Rel::LE, 0.0));
  r.add(Check::make("positivity.A1_max", a1max, Check::Rel::LE, 0.0));
  r.add(Check::make("positivity.A2_max", a2max, Check::Rel::LE, 0.0, w(at_a2)));
  r.add(Check::make("positivity.A3_max_when_flat_above_lambda", a3max, Check::Rel::LE, 0.0, w(at_a3)));
  r.note("positivity.C_hat", pc.C_hat);
  r.note("positivity.D_tilde", Dtilde);
  r.note("positivity.lambda0", pc.lambda0);
  r.note("positivity.A3_steps_checked", static_cast<double>(a3_checked));
  double a4 = 0.0, a5 = 0.0;
  for (std::size_t k = 0; k < s.t.size(); ++k) a4 = std::max(a4, std::fabs(s.A4[k])), a5 = std::max(a5, std::fabs(s.A5[k]));
  r.note("positivity.max_abs_A4", a4);
  r.note("positivity.max_abs_A5", a5);
  return pc;
}

// ---------------------------------------------------------------------------
// Smoothed negative part

/// 1/2 int phi_beta(lambda(t) - theta)^2 per stored state.
inline std::vector<double> phi_beta_functional(const Trajectory& tr, const Grid2& g, double beta,
                                               const std::function<double(double)>& lambda_fn) {
  if (!(beta > 0.0)) throw DomainError("phi_beta_functional: beta must be positive");
  std::vector<double> out;
  for (const State& st : tr.states) {
    const auto th = values_at_qp(g, st.theta);
    const double lam = lambda_fn(st.t);
    KahanSum s;
    for (double x : th) {
      const double p = phi_beta(lam - x, beta).v;
      s.add(g.qp_weight() * 0.5 * p * p);
    }
    out.push_back(s.value());
  }
  return out;
}

/// Discrete chain rule: [F(t_k) - F(t_{k-1})] / tau against
/// int phi phi' (lambda - theta) (lambda' - theta_t) at the midpoint.
inline std::vector<double> phi_beta_chain_rule_defect(const Trajectory& tr, const Grid2& g, double beta,
                                                      const std::function<double(double)>& lambda_fn,
                                                      const std::function<double(double)>& lambda_rate) {
  const auto F = phi_beta_functional(tr, g, beta, lambda_fn);
  std::vector<double> out;
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    const double tau = tr.states[k].t - tr.states[k - 1].t;
    const auto th1 = values_at_qp(g, tr.states[k].theta), th0 = values_at_qp(g, tr.states[k - 1].theta);
    const double tm = 0.5 * (tr.states[k].t + tr.states[k - 1].t);
    KahanSum s;
    for (std::size_t q = 0; q < th1.size(); ++q) {
      const double thm = 0.5 * (th1[q] + th0[q]);
      const Profile p = phi_beta(lambda_fn(tm) - thm, beta);
      s.add(g.qp_weight() * p.v * p.d1 * (lambda_rate(tm) - (th1[q] - th0[q]) / tau));
    }
    out.push_back((F[k] - F[k - 1]) / tau - s.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// A-priori scalings

struct ScalingQuantities {
  double eps = 0.0;
  double energy = 0.0;       // sup_t E_shifted / eps^2
  double deformation = 0.0;  // sup_t ||y - id||_H1 / eps
  double temperature = 0.0;  // sup_t ||theta - theta_c||_{L^{2/alpha}} / eps^alpha
  double dissipation = 0.0;  // total dissipation / eps^2
  double strain_rate = 0.0;  // ||d_t grad y||_{L2(I x Omega)} / eps
};

inline ScalingQuantities scaled_quantities(const Trajectory& tr, const Grid2& g, const Material& mat) {
  ScalingQuantities s;
  const double e = tr.eps, a = mat.alpha;
  s.eps = e;
  const Vector id = g.identity_field();
  const GridOperators ops(g);
  double sup_e = 0.0, sup_d = 0.0, sup_t = 0.0;
  KahanSum rate2;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const State& st = tr.states[k];
    sup_e = std::max(sup_e, tr.records[k].energy.E_shifted);
    sup_d = std::max(sup_d, h1_norm_vector(g, st.y - id));
    const auto th = values_at_qp(g, st.theta);
    KahanSum lp;
    for (double x : th) lp.add(g.qp_weight() * std::pow(std::fabs(x - mat.theta_c), 2.0 / a));
    sup_t = std::max(sup_t, std::pow(lp.value(), 0.5 * a));
    if (k) {
      const double tau = st.t - tr.states[k - 1].t;
      const double n = l2_norm_gradient(g, (st.y - tr.states[k - 1].y) / tau);
      rate2.add(tau * n * n);
    }
  }
  s.energy = sup_e / (e * e);
  s.deformation = sup_d / e;
  s.temperature = sup_t / std::pow(e, a);
  s.dissipation = tr.records.back().diss_cum / (e * e);
  s.strain_rate = std::sqrt(rate2.value()) / e;
  return s;
}

/// max/min across the sweep of every scaled quantity; all-zero columns count as ratio 1.
inline Report apriori_scaling_report(const std::vector<ScalingQuantities>& sweep, double threshold = 3.0) {
  Report r;
  r.title = "apriori-scaling";
  if (sweep.size() < 3) throw DomainError("apriori_scaling_report: need at least 3 eps values");
  const std::array<std::pair<const char*, double ScalingQuantities::*>, 5> cols{{
      {"scaling.energy_over_eps2", &ScalingQuantities::energy},
      {"scaling.deformation_H1_over_eps", &ScalingQuantities::deformation},
      {"scaling.temperature_over_eps_alpha", &ScalingQuantities::temperature},
      {"scaling.dissipation_over_eps2", &ScalingQuantities::dissipation},
      {"scaling.strain_rate_over_eps", &ScalingQuantities::strain_rate},
  }};
  for (const auto& [name, field] : cols) {
    double lo = INFINITY, hi = 0.0;
    std::string values;
    for (const auto& q : sweep) {
      lo = std::min(lo, q.*field);
      hi = std::max(hi, q.*field);
      values += (values.empty() ? "" : ",") + fmt_short(q.*field);
    }
    const double ratio = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : INFINITY);
    r.add(Check::make(std::string(name) + ".max_over_min", ratio, Check::Rel::LE, threshold, values));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Linearization errors

struct LinearizationError {
  double eps = 0.0;
  double u_H1_sup = 0.0;  // sup_t ||u_eps - u||_H1
  double rate_L2 = 0.0;   // ||d_t u_eps - d_t u||_{L2(I x Omega)}
  double mu_L2 = 0.0;     // ||mu_eps - mu||_{L2(I x Omega)}
};

inline LinearizationError linearization_error(const Trajectory& nl, const LinearTrajectory& lin, const Grid2& g,
                                              double theta_c, double alpha) {
  if (nl.nx != lin.nx || nl.ny != lin.ny || nl.nx != g.nx() || nl.ny != g.ny())
    throw DomainError("linearization_error: grid mismatch");
  if (nl.states.size() != lin.states.size() || std::fabs(nl.dt - lin.dt) > 1e-14 * nl.dt)
    throw DomainError("linearization_error: time grids differ");
  LinearizationError e;
  e.eps = nl.eps;
  const double ea = std::pow(nl.eps, alpha);
  const Vector id = g.identity_field();
  KahanSum r2, m2;
  for (std::size_t k = 0; k < nl.states.size(); ++k) {
    const Vector ue = (nl.states[k].y - id) / nl.eps;
    e.u_H1_sup = std::max(e.u_H1_sup, h1_norm_vector(g, ue - lin.states[k].u));
    if (k) {
      const Vector uep = (nl.states[k - 1].y - id) / nl.eps;
      const Vector dr = (ue - uep - (lin.states[k].u - lin.states[k - 1].u)) / nl.dt;
      const double a = l2_norm_vector(g, dr);
      r2.add(nl.dt * a * a);
      const Vector me = (nl.states[k].theta.array() - theta_c).matrix() / ea;
      const double b = l2_norm_scalar(g, me - lin.states[k].mu);
      m2.add(nl.dt * b * b);
    }
  }
  e.rate_L2 = std::sqrt(r2.value());
  e.mu_L2 = std::sqrt(m2.value());
  return e;
}

/// Errors must strictly decrease along the ladder with a reduction of at
/// least `factor` per halving of eps (scaled by log2 of the actual ratio).
inline Report linearization_report(const std::vector<LinearizationError>& errs, double factor = 1.3,
                                   const std::string& prefix = "linearization") {
  Report r;
  r.title = prefix;
  const std::array<std::pair<const char*, double LinearizationError::*>, 3> cols{{
      {"u_H1_sup", &LinearizationError::u_H1_sup},
      {"rate_L2", &LinearizationError::rate_L2},
      {"mu_L2", &LinearizationError::mu_L2},
  }};
  for (const auto& [name, field] : cols) {
    double worst = INFINITY;
    std::string values;
    for (std::size_t i = 0; i < errs.size(); ++i) {
      values += (values.empty() ? "" : ",") + fmt_short(errs[i].*field);
      if (i == 0) continue;
      const double halvings = std::log2(errs[i - 1].eps / errs[i].eps);
      const double red = errs[i].*field > 0.0 ? std::pow(errs[i - 1].*field / errs[i].*field, 1.0 / halvings) : INFINITY;
      worst = std::min(worst, red);
    }
    r.add(Check::make(prefix + "." + name + ".min_reduction", worst, Check::Rel::GE, factor, values));
    for (std::size_t i = 1; i < errs.size(); ++i)
      r.note(prefix + "." + name + ".log2_rate_" + std::to_string(i),
             std::log2(errs[i - 1].*field / errs[i].*field) / std::log2(errs[i - 1].eps / errs[i].eps));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Korn ratios

/// ||grad u||_L2 / ||sym(F^T grad u)||_L2; +inf for a vanishing denominator with nonzero numerator.
inline double korn_ratio(const Vector& u, const std::vector<Mat2>& F, const Grid2& g) {
  const auto G = gradient_at_qp(g, u);
  if (F.size() != G.size()) throw DomainError("korn_ratio: F has the wrong number of quadrature points");
  KahanSum num, den;
  for (std::size_t q = 0; q < G.size(); ++q) {
    const Mat2 s = sym(transpose(F[q]) * G[q]);
    num.add(g.qp_weight() * ddot(G[q], G[q]));
    den.add(g.qp_weight() * ddot(s, s));
  }
  if (den.value() <= 0.0) return num.value() > 0.0 ? INFINITY : 0.0;
  return std::sqrt(num.value() / den.value());
}

/// Worst Korn ratio over random admissible fields.
inline double korn_ratio_sampled(const std::vector<Mat2>& F, const Grid2& g, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector u(2 * g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n)
      for (int c = 0; c < 2; ++c) u[2 * n + c] = g.is_dirichlet(n) ? 0.0 : U(rng);
    worst = std::max(worst, korn_ratio(u, F, g));
  }
  return worst;
}

}  // namespace thermovisc
