#pragma once

// Implicit Euler for the small-strain limit
//   -div(CW e(u) + CD e(u_t) + B_alpha mu) = f,  u = 0 on {x = 0}, traction g on {x = 1}
//   cV mu_t - div(K_c grad mu) = CD_alpha e(u_t) : e(u_t) + theta_c Bhat : e(u_t)
//   K_c grad mu . n + kappa mu = kappa mu_flat
// on the same grid, quadrature and lumping as the nonlinear solver.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "sim_config.hpp"

namespace thermovisc {

struct LinearState {
  Vector u;
  Vector mu;
  double t = 0.0;
};

struct LinearRecord {
  int step = 0;
  double t = 0.0;
  double E0 = 0.0;                 // 1/2 int CW e(u) : e(u)
  double diss_increment = 0.0;     // tau int CD e(u_t) : e(u_t)
  double diss_cum = 0.0;
  double numerical_diss = 0.0;     // 1/2 CW[e(du), e(du)]
  double mu_min = 0.0, mu_max = 0.0;
  double identity_residual = 0.0;  // absolute
  double identity_scale = 0.0;     // sum of the magnitudes of all terms
  int picard_iters = 0;
  double mech_res = 0.0, heat_res = 0.0;
  double identity_relative() const { return identity_scale > 0.0 ? std::fabs(identity_residual) / identity_scale : 0.0; }
};

struct LinearTrajectory {
  int nx = 0, ny = 0;
  double dt = 0.0;
  std::vector<LinearState> states;
  std::vector<LinearRecord> records;
};

/// Right-hand side data of one step.
struct LinearStepData {
  Vector load;          // <l, v>
  Vector boundary_rhs;  // kappa int mu_flat phi_i on the boundary (lumped)
  Vector heat_source;   // extra int h phi_i; empty for none
};

class LinearSimulator {
 public:
  LinearSimulator(const SimConfig& cfg, const Material& mat)
      : cfg_(cfg), mat_(mat), grid_(cfg.nx, cfg.ny), ops_(grid_), tau_(cfg.step_size()),
        tens_(linearized_tensors(mat, mat.alpha)) {
    mat_.check();
    cfg_.check(mat_);
    free_ = free_vector_dofs(grid_);
    KW_ = assemble_vector_stiffness(grid_, [&](int) { return tens_.CW; });
    KD_ = assemble_vector_stiffness(grid_, [&](int) { return tens_.CD; });
    Kmech_free_ = restrict_matrix(SparseMatrix(KW_ + (1.0 / tau_) * KD_), free_);
    couple_mech_ = norm(tens_.B_alpha) > 0.0;
    couple_heat_ = norm(tens_.Bhat) > 0.0;
    if (couple_mech_) Cmech_ = coupling_matrix(tens_.B_alpha);
    if (couple_heat_) Cheat_ = coupling_matrix(tens_.Bhat);
    mass_ = lumped_integral(grid_, [&](int) { return tens_.cV_bar; });
    boundary_ = mat_.kappa * boundary_lumped_length(grid_);
    const SparseMatrix Kc = assemble_scalar_stiffness(grid_, [&](int) { return tens_.K_c; });
    SparseMatrix D(grid_.num_nodes(), grid_.num_nodes());
    for (int i = 0; i < grid_.num_nodes(); ++i) D.insert(i, i) = mass_[i] / tau_ + boundary_[i];
    Aheat_ = Kc + D;
    coupling_ = cfg_.coupling;
    if (coupling_ == Coupling::Auto) coupling_ = couple_mech_ && couple_heat_ ? Coupling::Picard : Coupling::MechFirst;
  }

  const Grid2& grid() const { return grid_; }
  const LinearizedTensors& tensors() const { return tens_; }
  Coupling coupling() const { return coupling_; }
  double tau() const { return tau_; }
  bool mechanics_sees_temperature() const { return couple_mech_; }

  LinearState initial_state() const {
    LinearState s;
    s.u = grid_.interpolate_vector([&](const Vec2& x) { return cfg_.u0_amp * SimConfig::u0_shape(x); });
    s.mu = grid_.interpolate_scalar([&](const Vec2& x) { return cfg_.mu0_amp * SimConfig::mu0_shape(x); });
    return s;
  }

  double load_time(double t_k) const { return t_k - 0.5 * tau_; }

  LinearStepData step_data(double t_k) const {
    const double tl = load_time(t_k);
    const Vec2 f = cfg_.loads.f(tl), g = cfg_.loads.g(tl);
    LinearStepData d;
    d.load = assemble_load(grid_, [&](const Vec2&) { return f; }, [&](const Vec2&) { return g; });
    d.boundary_rhs = cfg_.mu_flat(mat_, tl) * boundary_;
    return d;
  }

  double energy(const Vector& u) const { return 0.5 * u.dot(KW_ * u); }

  Vector mech_step(const Vector& u_prev, const Vector& mu, const Vector& load, double* res = nullptr) const {
    Vector rhs = load + (1.0 / tau_) * (KD_ * u_prev);
    if (couple_mech_) rhs -= Cmech_ * mu;
    Vector b(free_.size()), guess(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) {
      b[k] = rhs[free_[k]];
      guess[k] = u_prev[free_[k]];
    }
    const LinearSolve ls = solve_spd(Kmech_free_, b, guess, cfg_.solver.lin_tol, 20 * static_cast<int>(b.size()),
                                     "linear mechanical step");
    if (res) *res = ls.residual;
    Vector u = Vector::Zero(u_prev.size());
    for (std::size_t k = 0; k < free_.size(); ++k) u[free_[k]] = ls.x[k];
    return u;
  }

  /// Lumped viscous-heating source int CD_alpha e(u_t) : e(u_t) phi_i.
  Vector viscous_source(const Vector& rate) const {
    if (tens_.alpha != 2.0) return Vector::Zero(grid_.num_nodes());
    const auto G = unpack_mat2(ops_.B * rate);
    return lumped_integral(grid_, [&](int q) { return ddot(tens_.CD_alpha * G[q], G[q]); });
  }

  Vector heat_step(const Vector& mu_prev, const Vector& rate, const LinearStepData& d, double* res = nullptr) const {
    Vector rhs = mass_.cwiseProduct(mu_prev) / tau_ + d.boundary_rhs + viscous_source(rate);
    if (couple_heat_) rhs += tens_.theta_c * (Cheat_.transpose() * rate);
    if (d.heat_source.size()) rhs += d.heat_source;
    const LinearSolve ls =
        solve_spd(Aheat_, rhs, mu_prev, cfg_.solver.lin_tol, 20 * static_cast<int>(rhs.size()), "linear heat step");
    if (res) *res = ls.residual;
    return ls.x;
  }

  /// One step; prev_rate is (u^{k-1} - u^{k-2}) / tau, used by the heat-first order.
  LinearState advance(const LinearState& prev, const Vector& prev_rate, const LinearStepData& d, double t_k,
                      LinearRecord& rec) const {
    LinearState next;
    next.t = t_k;
    Vector mu_used;
    switch (coupling_) {
      case Coupling::Auto:
      case Coupling::MechFirst:
        next.u = mech_step(prev.u, prev.mu, d.load, &rec.mech_res);
        next.mu = heat_step(prev.mu, (next.u - prev.u) / tau_, d, &rec.heat_res);
        mu_used = prev.mu;
        rec.picard_iters = 1;
        break;
      case Coupling::HeatFirst:
        next.mu = heat_step(prev.mu, prev_rate, d, &rec.heat_res);
        next.u = mech_step(prev.u, next.mu, d.load, &rec.mech_res);
        mu_used = next.mu;
        rec.picard_iters = 1;
        break;
      case Coupling::Picard: {
        Vector mu = prev.mu;
        bool done = false;
        for (int it = 1; it <= cfg_.solver.picard_max; ++it) {
          next.u = mech_step(prev.u, mu, d.load, &rec.mech_res);
          next.mu = heat_step(prev.mu, (next.u - prev.u) / tau_, d, &rec.heat_res);
          const double change = (next.mu - mu).lpNorm<Eigen::Infinity>();
          mu_used = mu;
          mu = next.mu;
          rec.picard_iters = it;
          if (change <= cfg_.solver.picard_tol * (1.0 + next.mu.lpNorm<Eigen::Infinity>())) {
            // Mechanics consistent with the converged temperature.
            next.u = mech_step(prev.u, mu, d.load, &rec.mech_res);
            mu_used = mu;
            done = true;
            break;
          }
        }
        if (!done)
          throw SolverError("Picard coupling did not converge in " + std::to_string(cfg_.solver.picard_max) +
                            " sweeps");
        break;
      }
    }
    const Vector du = next.u - prev.u;
    const double dE = energy(next.u) - energy(prev.u);
    rec.numerical_diss = 0.5 * du.dot(KW_ * du);
    rec.diss_increment = du.dot(KD_ * du) / tau_;
    const double load_work = d.load.dot(du);
    const double cpl = couple_mech_ ? mu_used.dot(Cmech_.transpose() * du) : 0.0;
    rec.identity_residual = dE + rec.numerical_diss + rec.diss_increment - load_work + cpl;
    rec.identity_scale =
        std::fabs(dE) + rec.numerical_diss + rec.diss_increment + std::fabs(load_work) + std::fabs(cpl);
    rec.t = t_k;
    rec.E0 = energy(next.u);
    rec.mu_min = next.mu.minCoeff();
    rec.mu_max = next.mu.maxCoeff();
    return next;
  }

  LinearRecord initial_record(const LinearState& s) const {
    LinearRecord r;
    r.E0 = energy(s.u);
    r.mu_min = s.mu.minCoeff();
    r.mu_max = s.mu.maxCoeff();
    return r;
  }

  LinearTrajectory run(const std::function<LinearStepData(double)>& data = {}) const {
    LinearTrajectory tr;
    tr.nx = cfg_.nx;
    tr.ny = cfg_.ny;
    tr.dt = tau_;
    tr.states.push_back(initial_state());
    tr.records.push_back(initial_record(tr.states.back()));
    Vector rate = Vector::Zero(tr.states[0].u.size());
    double cum = 0.0;
    for (int k = 1; k <= cfg_.num_steps(); ++k) {
      const double t_k = k * tau_;
      LinearRecord rec;
      rec.step = k;
      LinearState next;
      try {
        next = advance(tr.states.back(), rate, data ? data(t_k) : step_data(t_k), t_k, rec);
      } catch (const SolverError& e) {
        throw SolverError("linear step " + std::to_string(k) + ": " + e.what());
      }
      rate = (next.u - tr.states.back().u) / tau_;
      cum += rec.diss_increment;
      rec.diss_cum = cum;
      tr.states.push_back(std::move(next));
      tr.records.push_back(rec);
    }
    return tr;
  }

  /// Mechanics only, with the temperature held at zero; used for the decoupling check.
  LinearTrajectory run_mechanics_only() const {
    LinearTrajectory tr;
    tr.nx = cfg_.nx;
    tr.ny = cfg_.ny;
    tr.dt = tau_;
    LinearState s = initial_state();
    s.mu.setZero();
    tr.states.push_back(s);
    tr.records.push_back(initial_record(s));
    for (int k = 1; k <= cfg_.num_steps(); ++k) {
      const double t_k = k * tau_;
      LinearState next;
      next.t = t_k;
      next.u = mech_step(tr.states.back().u, tr.states.back().mu, step_data(t_k).load);
      next.mu = tr.states.back().mu;
      tr.states.push_back(std::move(next));
      LinearRecord r;
      r.step = k;
      r.t = t_k;
      r.E0 = energy(tr.states.back().u);
      tr.records.push_back(r);
    }
    return tr;
  }

 private:
  /// C(dof, i) = int phi_i B : grad phi_dof.
  SparseMatrix coupling_matrix(const Mat2& B) const {
    Triplets t;
    const double w = grid_.qp_weight();
    for (int c = 0; c < grid_.num_cells(); ++c) {
      const auto nodes = grid_.cell_nodes(c);
      for (int ql = 0; ql < 4; ++ql)
        for (int a = 0; a < 4; ++a)
          for (int comp = 0; comp < 2; ++comp) {
            const Vec2& dphi = grid_.dshape(ql, a);
            const double bg = B(comp, 0) * dphi[0] + B(comp, 1) * dphi[1];
            if (bg == 0.0) continue;
            for (int b = 0; b < 4; ++b)
              t.emplace_back(2 * nodes[a] + comp, nodes[b], w * bg * grid_.shape(ql, b));
          }
    }
    SparseMatrix C(2 * grid_.num_nodes(), grid_.num_nodes());
    C.setFromTriplets(t.begin(), t.end());
    return C;
  }

  SimConfig cfg_;
  Material mat_;
  Grid2 grid_;
  GridOperators ops_;
  double tau_;
  LinearizedTensors tens_;
  std::vector<int> free_;
  SparseMatrix KW_, KD_, Kmech_free_, Cmech_, Cheat_, Aheat_;
  Vector mass_, boundary_;
  bool couple_mech_ = false, couple_heat_ = false;
  Coupling coupling_ = Coupling::MechFirst;
};

// ---------------------------------------------------------------------------
// Manufactured solutions
//
//   u(x, t) = (1 + t) P(x),  mu(x, t) = (1 + t) Q(x)
// with P, Q quadratic and P = 0 on {x = 0}. Body force, tractions on every
// Neumann edge, Robin data and an extra heat source are chosen so that the
// pair solves the linear system exactly; backward differences are exact in
// time, so the measured error is purely spatial.

struct Quadratic {
  // c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2
  std::array<double, 6> c{};
  double value(const Vec2& p) const {
    const double x = p[0], y = p[1];
    return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
  }
  Vec2 grad(const Vec2& p) const {
    return Vec2{{c[1] + 2 * c[3] * p[0] + c[4] * p[1], c[2] + c[4] * p[0] + 2 * c[5] * p[1]}};
  }
  Mat2 hessian() const {
    Mat2 H;
    H(0, 0) = 2 * c[3];
    H(0, 1) = H(1, 0) = c[4];
    H(1, 1) = 2 * c[5];
    return H;
  }
};

struct ManufacturedSolution {
  std::array<Quadratic, 2> P{{Quadratic{{0, 0, 0, 0.5, 1.0, 0}}, Quadratic{{0, 1.0, 0, -1.0, 0.5, 0}}}};
  Quadratic Q{{1.0, 0, 0, 1.0, 1.0, -1.0}};

  Vec2 u(const Vec2& x, double t) const { return (1 + t) * Vec2{{P[0].value(x), P[1].value(x)}}; }
  Mat2 grad_P(const Vec2& x) const {
    Mat2 G;
    for (int a = 0; a < 2; ++a) {
      const Vec2 g = P[a].grad(x);
      G(a, 0) = g[0];
      G(a, 1) = g[1];
    }
    return G;
  }
  double mu(const Vec2& x, double t) const { return (1 + t) * Q.value(x); }

  /// Stress CW grad u + CD grad u_t + B_alpha mu.
  Mat2 stress(const LinearizedTensors& T, const Vec2& x, double t) const {
    const Mat2 G = grad_P(x);
    return T.CW * ((1 + t) * G) + T.CD * G + mu(x, t) * T.B_alpha;
  }
  /// f = -div(stress).
  Vec2 body_force(const LinearizedTensors& T, const Vec2& x, double t) const {
    Vec2 f;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        // d_b stress_ab
        double s = 0.0;
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const double ddP = P[c].hessian()(b, d);
            const int idx = ((a * 2 + b) * 2 + c) * 2 + d;
            s += ((1 + t) * T.CW.t[idx] + T.CD.t[idx]) * ddP;
          }
        s += T.B_alpha(a, b) * (1 + t) * Q.grad(x)[b];
        f.v[a] -= s;
      }
    return f;
  }
  /// Extra heat source h = cV mu_t - div(K grad mu) - CD_alpha e(u_t):e(u_t) - theta_c Bhat : e(u_t).
  double heat_source(const LinearizedTensors& T, const Vec2& x, double t) const {
    const Mat2 G = grad_P(x);
    const double divK = (1 + t) * ddot(T.K_c, Q.hessian());
    const double visc = T.alpha == 2.0 ? ddot(T.CD_alpha * G, G) : 0.0;
    return T.cV_bar * Q.value(x) - divK - visc - T.theta_c * ddot(T.Bhat, G);
  }
  /// Robin datum kappa mu_flat = K grad mu . n + kappa mu.
  double robin_rhs(const LinearizedTensors& T, double kappa, const Vec2& x, const Vec2& n, double t) const {
    return dot(T.K_c * ((1 + t) * Q.grad(x)), n) + kappa * mu(x, t);
  }
};

struct ManufacturedErrors {
  double h = 0.0;
  double u_l2 = 0.0, mu_l2 = 0.0;
  double max_identity_relative = 0.0;
};

inline ManufacturedErrors manufactured_errors(int n, double T, double dt, const Material& mat,
                                              Coupling coupling = Coupling::Auto) {
  SimConfig cfg;
  cfg.nx = cfg.ny = n;
  cfg.T = T;
  cfg.dt = dt;
  cfg.coupling = coupling;
  cfg.solver.lin_tol = 1e-13;
  cfg.solver.picard_max = 50;
  cfg.solver.picard_tol = 1e-13;
  const LinearSimulator sim(cfg, mat);
  const Grid2& g = sim.grid();
  const LinearizedTensors& Tn = sim.tensors();
  const ManufacturedSolution ms;

  auto data = [&](double t) {
    LinearStepData d;
    d.load = Vector::Zero(2 * g.num_nodes());
    const double w = g.qp_weight();
    for (int c = 0; c < g.num_cells(); ++c) {
      const auto nodes = g.cell_nodes(c);
      for (int ql = 0; ql < 4; ++ql) {
        const Vec2 f = ms.body_force(Tn, g.qp_position(4 * c + ql), t);
        for (int a = 0; a < 4; ++a)
          for (int comp = 0; comp < 2; ++comp) d.load[2 * nodes[a] + comp] += w * f[comp] * g.shape(ql, a);
      }
    }
    d.boundary_rhs = Vector::Zero(g.num_nodes());
    const double gp = 0.5 / std::sqrt(3.0);
    for (const auto& e : g.boundary_edges()) {
      const Vec2 x0 = g.position(e.n0), x1 = g.position(e.n1);
      const Vec2 mid = 0.5 * (x0 + x1);
      Vec2 n;
      if (std::fabs(x0[0] - x1[0]) < 1e-14)
        n = Vec2{{mid[0] < 0.5 ? -1.0 : 1.0, 0.0}};
      else
        n = Vec2{{0.0, mid[1] < 0.5 ? -1.0 : 1.0}};
      d.boundary_rhs[e.n0] += 0.5 * e.length * ms.robin_rhs(Tn, mat.kappa, x0, n, t);
      d.boundary_rhs[e.n1] += 0.5 * e.length * ms.robin_rhs(Tn, mat.kappa, x1, n, t);
      if (n[0] < 0.0) continue;  // Dirichlet edge
      for (double s : {0.5 - gp, 0.5 + gp}) {
        const Vec2 x = (1.0 - s) * x0 + s * x1;
        const Vec2 tr = ms.stress(Tn, x, t) * n;
        for (int comp = 0; comp < 2; ++comp) {
          d.load[2 * e.n0 + comp] += 0.5 * e.length * tr[comp] * (1.0 - s);
          d.load[2 * e.n1 + comp] += 0.5 * e.length * tr[comp] * s;
        }
      }
    }
    d.heat_source = lumped_integral(g, [&](int q) { return ms.heat_source(Tn, g.qp_position(q), t); });
    return d;
  };

  // Initial state from the exact fields.
  LinearTrajectory tr;
  LinearState s;
  s.u = g.interpolate_vector([&](const Vec2& x) { return ms.u(x, 0.0); });
  s.mu = g.interpolate_scalar([&](const Vec2& x) { return ms.mu(x, 0.0); });
  Vector rate = g.interpolate_vector([&](const Vec2& x) { return ms.u(x, 1.0) - ms.u(x, 0.0); });
  ManufacturedErrors err;
  err.h = 1.0 / n;
  for (int k = 1; k <= cfg.num_steps(); ++k) {
    const double t_k = k * sim.tau();
    LinearRecord rec;
    LinearState next = sim.advance(s, rate, data(t_k), t_k, rec);
    err.max_identity_relative = std::max(err.max_identity_relative, rec.identity_relative());
    rate = (next.u - s.u) / sim.tau();
    s = std::move(next);
  }
  const double tf = s.t;
  const auto uh = vector_values_at_qp(g, s.u);
  const auto mh = values_at_qp(g, s.mu);
  KahanSum eu, em;
  for (int q = 0; q < g.num_qp(); ++q) {
    const Vec2 x = g.qp_position(q);
    const Vec2 du = uh[q] - ms.u(x, tf);
    const double dm = mh[q] - ms.mu(x, tf);
    eu.add(g.qp_weight() * dot(du, du));
    em.add(g.qp_weight() * dm * dm);
  }
  err.u_l2 = std::sqrt(eu.value());
  err.mu_l2 = std::sqrt(em.value());
  return err;
}

}  // namespace thermovisc
