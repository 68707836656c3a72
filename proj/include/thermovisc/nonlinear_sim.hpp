#pragma once

// Staggered time stepping of the nonlinear model. Each step first minimizes
// the incremental functional
//   Phi_k(y) = int W(grad y, th^{k-1}) + H(grad^2 y)
//            + tau int R(grad y^{k-1}, (grad y - grad y^{k-1}) / tau, th^{k-1}) - <l(t_k), y>
// over y = id on {x = 0}, then solves the semi-implicit heat step with all
// coefficients frozen at (grad y^{k-1}, th^{k-1}).

#include <Eigen/SparseCholesky>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "lbfgs.hpp"
#include "material.hpp"
#include "sim_config.hpp"

namespace thermovisc {

struct StepRecord {
  int step = 0;
  double t = 0.0;
  EnergyIntegrals energy;
  double diss_increment = 0.0;  // tau int xi
  double diss_cum = 0.0;
  double theta_min = 0.0, theta_max = 0.0;
  int mech_iters = 0;
  double mech_gnorm = 0.0;
  double phi_before = 0.0, phi_after = 0.0;
  double descent_slack = 0.0;   // phi_after - phi_before
  double energy_residual = 0.0;
  double energy_bound = 0.0;
  double full_residual = 0.0;   // with the exact increment M(y^k) - M(y^{k-1})
  double heat_res = 0.0;        // relative CG residual
  double heat_energy_res = 0.0; // tau ||A th - rhs||_1
  int heat_iters = 0;
  double theta_flat = 0.0;
  int heat_positive_offdiag = 0;
};

struct Trajectory {
  int nx = 0, ny = 0;
  double dt = 0.0;
  double eps = 0.0;
  std::vector<State> states;
  std::vector<StepRecord> records;  // records[k] belongs to states[k]; records[0] is the initial state
};

/// Per-qp data of the previous state shared by both half steps.
struct FrozenState {
  std::vector<Mat2> F;
  std::vector<double> theta;
};

struct MechanicalResult {
  Vector y;
  int iterations = 0;
  double gnorm = 0.0;
  double phi_before = 0.0, phi_after = 0.0;
  double gtol_abs = 0.0;
};

struct HeatResult {
  Vector theta;
  double residual = 0.0;
  double energy_residual = 0.0;
  int iterations = 0;
  int positive_offdiag = 0;
  double diss_increment = 0.0;
};

/// Terms of the discrete mechanical energy identity of one step.
struct EnergyIdentity {
  double dM_linear = 0.0;      // DM(y^k)[y^k - y^{k-1}]
  double dM_exact = 0.0;       // M(y^k) - M(y^{k-1})
  double dissipation = 0.0;    // tau int xi
  double coupling_work = 0.0;  // int d_F W_cpl(F^k, th^{k-1}) : (F^k - F^{k-1})
  double load_work = 0.0;      // <l, y^k - y^{k-1}>
  double increment_l1 = 0.0;   // ||y^k - y^{k-1}||_1 over free dofs
  double residual() const { return dM_linear + dissipation + coupling_work - load_work; }
  double full_residual() const { return dM_exact + dissipation + coupling_work - load_work; }
};

class NonlinearSimulator {
 public:
  NonlinearSimulator(const SimConfig& cfg, const Material& mat)
      : cfg_(cfg), mat_(mat), grid_(cfg.nx, cfg.ny), ops_(grid_), tau_(cfg.step_size()) {
    mat_.check();
    cfg_.check(mat_);
    Bt_ = ops_.B.transpose();
    Hst_ = ops_.Hs.transpose();
    free_ = free_vector_dofs(grid_);
    fixed_mask_.assign(2 * grid_.num_nodes(), true);
    for (int d : free_) fixed_mask_[d] = false;
  }

  const Grid2& grid() const { return grid_; }
  const GridOperators& ops() const { return ops_; }
  const SimConfig& config() const { return cfg_; }
  const Material& material() const { return mat_; }
  double tau() const { return tau_; }

  State initial_state() const {
    State s;
    const double e = cfg_.eps;
    s.y = grid_.interpolate_vector([&](const Vec2& x) { return x + (e * cfg_.u0_amp) * SimConfig::u0_shape(x); });
    const double scale = std::pow(e, mat_.alpha) * cfg_.mu0_amp;
    s.theta = grid_.interpolate_scalar([&](const Vec2& x) { return mat_.theta_c + scale * SimConfig::mu0_shape(x); });
    s.t = 0.0;
    const auto F = unpack_mat2(ops_.B * s.y);
    const auto [m, q] = min_det(F);
    if (!(m > cfg_.solver.det_floor))
      throw ConfigError("initial deformation violates det(grad y0) > det_floor (min " + fmt_short(m) +
                        " at quadrature point " + std::to_string(q) + ")");
    if (!(s.theta.minCoeff() > 0.0)) throw ConfigError("initial temperature must be positive");
    return s;
  }

  FrozenState freeze(const State& s) const {
    FrozenState f{unpack_mat2(ops_.B * s.y), values_at_qp(grid_, s.theta)};
    require_feasible(f.F, "freeze");
    for (std::size_t q = 0; q < f.theta.size(); ++q)
      if (!(f.theta[q] > 0.0))
        throw SolverError("non-positive temperature " + fmt_short(f.theta[q]) + " at quadrature point " +
                          std::to_string(q));
    return f;
  }

  /// Time at which the data of step k (ending at t_k) are sampled.
  double load_time(double t_k) const { return t_k - 0.5 * tau_; }

  Vector load_vector(double t_k) const {
    const double s = cfg_.load_factor(), tl = load_time(t_k);
    const Vec2 f = s * cfg_.loads.f(tl), g = s * cfg_.loads.g(tl);
    return assemble_load(grid_, [&](const Vec2&) { return f; }, [&](const Vec2&) { return g; });
  }

  /// Phi_k(y) and its gradient (zero on Dirichlet dofs); +inf when det grad y <= det_floor somewhere.
  double incremental_energy(const FrozenState& prev, const Vector& load, const Vector& y, Vector* grad) const {
    const Vector Fv = ops_.B * y;
    const Vector Gv = ops_.Hs * y;
    const int nq = grid_.num_qp();
    const double w = grid_.qp_weight();
    Vector sF(grad ? 4 * nq : 0), sG(grad ? 8 * nq : 0);
    KahanSum phi;
    for (int q = 0; q < nq; ++q) {
      Mat2 F;
      for (int p = 0; p < 4; ++p) F.a[p] = Fv[4 * q + p];
      if (!(det(F) > cfg_.solver.det_floor)) return std::numeric_limits<double>::infinity();
      Gradient3 G;
      for (int k = 0; k < 2; ++k)
        for (int p = 0; p < 4; ++p) G.slice[k].a[p] = Gv[8 * q + 4 * k + p];
      const EnergyAndStress W = free_energy_with_dF(mat_, F, prev.theta[q], cfg_.eps);
      const Dissipation D = dissipation(mat_, prev.F[q], (1.0 / tau_) * (F - prev.F[q]), prev.theta[q]);
      phi.add(w * (W.W + tau_ * D.R + hyper_energy(mat_, G)));
      if (grad) {
        const Mat2 s = w * (W.dF + D.stress);
        for (int p = 0; p < 4; ++p) sF[4 * q + p] = s.a[p];
        const Gradient3 h = w * hyper_gradient(mat_, G);
        for (int k = 0; k < 2; ++k)
          for (int p = 0; p < 4; ++p) sG[8 * q + 4 * k + p] = h.slice[k].a[p];
      }
    }
    if (grad) {
      *grad = Bt_ * sF + Hst_ * sG - load;
      for (std::size_t d = 0; d < fixed_mask_.size(); ++d)
        if (fixed_mask_[d]) (*grad)[static_cast<Eigen::Index>(d)] = 0.0;
    }
    return phi.value() - load.dot(y);
  }

  MechanicalResult mechanical_step(const State& prev, const FrozenState& fp, const Vector* older_y, double t_k) const {
    const Vector load = load_vector(t_k);
    MechanicalResult r;
    r.phi_before = incremental_energy(fp, load, prev.y, nullptr);
    if (!std::isfinite(r.phi_before)) throw SolverError("previous deformation violates the det floor");

    Vector start = prev.y;
    if (older_y) {
      Vector extrap = 2.0 * prev.y - *older_y;
      for (std::size_t d = 0; d < fixed_mask_.size(); ++d)
        if (fixed_mask_[d]) extrap[static_cast<Eigen::Index>(d)] = prev.y[static_cast<Eigen::Index>(d)];
      if (incremental_energy(fp, load, extrap, nullptr) < r.phi_before) start = std::move(extrap);
    }

    // Preconditioner: viscous Hessian at the frozen state plus the elastic
    // Hessian at the identity.
    const Tensor4 elastic = 8.0 * Tensor4::identity_sym();
    const SparseMatrix P = assemble_vector_stiffness(grid_, [&](int q) {
      return (1.0 / tau_) * dissipation_hessian(mat_, fp.F[q], fp.theta[q]) + elastic;
    });
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(Eigen::SparseMatrix<double>(restrict_matrix(P, free_)));
    if (ldlt.info() != Eigen::Success) throw SolverError("mechanical preconditioner factorization failed");

    const Vector base = start;
    auto embed = [&](const Eigen::VectorXd& x) {
      Vector y = base;
      for (std::size_t k = 0; k < free_.size(); ++k) y[free_[k]] = x[static_cast<Eigen::Index>(k)];
      return y;
    };
    Eigen::VectorXd x0(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) x0[static_cast<Eigen::Index>(k)] = start[free_[k]];

    Vector full_grad;
    auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& gx) {
      const double f = incremental_energy(fp, load, embed(x), &full_grad);
      if (!std::isfinite(f)) return f;
      gx.resize(static_cast<Eigen::Index>(free_.size()));
      for (std::size_t k = 0; k < free_.size(); ++k) gx[static_cast<Eigen::Index>(k)] = full_grad[free_[k]];
      return f;
    };
    auto precond = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return ldlt.solve(v); };

    LbfgsOptions lo;
    lo.memory = cfg_.solver.lbfgs_memory;
    lo.max_iter = cfg_.solver.mech_max_iter;
    lo.gtol = cfg_.solver.mech_gtol;
    const LbfgsResult res = lbfgs_minimize(x0, eval, precond, lo);
    r.y = embed(res.x);
    r.iterations = res.iterations;
    r.gnorm = res.gnorm_inf;
    r.phi_after = res.f;
    r.gtol_abs = cfg_.solver.mech_gtol * (1.0 + std::fabs(res.f));
    if (r.phi_after > r.phi_before + 1e-10 * (1.0 + std::fabs(r.phi_before)))
      throw SolverError("mechanical step increased the incremental energy (" + fmt_short(r.phi_before) + " -> " +
                        fmt_short(r.phi_after) + ")");
    return r;
  }

  HeatCoefficients heat_coefficients(const FrozenState& fp, const Vector& y_k) const {
    const auto Fk = unpack_mat2(ops_.B * y_k);
    const int nq = grid_.num_qp();
    HeatCoefficients c;
    c.cV.resize(nq);
    c.conductivity.resize(nq);
    c.source.resize(nq);
    c.adiabatic.resize(nq);
    for (int q = 0; q < nq; ++q) {
      const Mat2 rate = (1.0 / tau_) * (Fk[q] - fp.F[q]);
      c.cV[q] = heat_capacity(mat_, fp.F[q], fp.theta[q], cfg_.eps);
      if (!(c.cV[q] > 0.0)) throw SolverError("non-positive heat capacity at quadrature point " + std::to_string(q));
      c.conductivity[q] = conductivity(mat_, fp.F[q], fp.theta[q]);
      const double xi = dissipation(mat_, fp.F[q], rate, fp.theta[q]).xi;
      c.source[q] = regularize_xi(truncate_xi(xi, mat_.alpha, mat_.Lambda), mat_.alpha, cfg_.nu);
      c.adiabatic[q] = ddot(coupling_dFtheta(mat_, fp.F[q], fp.theta[q], cfg_.eps), rate);
    }
    return c;
  }

  double boundary_temperature(double t_k) const { return cfg_.theta_flat(mat_, load_time(t_k)); }

  HeatResult heat_step(const State& prev, const FrozenState& fp, const Vector& y_k, double t_k) const {
    HeatResult r;
    if (!cfg_.heat_enabled) {
      r.theta = prev.theta;
      return r;
    }
    const HeatCoefficients c = heat_coefficients(fp, y_k);
    const Vector flat = Vector::Constant(grid_.num_nodes(), boundary_temperature(t_k));
    const HeatSystem sys = assemble_heat_system(grid_, c, prev.theta, flat, mat_.kappa, tau_);
    r.positive_offdiag = positive_offdiagonals(sys.A);
    const LinearSolve ls = solve_heat_system(sys, prev.theta, cfg_.solver.heat_tol, cfg_.solver.heat_max_iter);
    r.theta = ls.x;
    r.residual = ls.residual;
    r.iterations = ls.iterations;
    r.energy_residual = tau_ * (sys.A * ls.x - sys.rhs).lpNorm<1>();
    return r;
  }

  EnergyIdentity energy_identity(const State& prev, const FrozenState& fp, const Vector& y_k, double t_k) const {
    return energy_identity_terms(prev, fp, y_k, load_vector(t_k));
  }

  EnergyIdentity energy_identity_terms(const State& prev, const FrozenState& fp, const Vector& y_k,
                                       const Vector& load) const {
    const Vector dy = y_k - prev.y;
    const auto Fk = unpack_mat2(ops_.B * y_k);
    const auto Gk = unpack_gradient3(ops_.Hs * y_k);
    const auto Gp = unpack_gradient3(ops_.Hs * prev.y);
    const double w = grid_.qp_weight();
    KahanSum dml, dme, diss, cpl;
    for (int q = 0; q < grid_.num_qp(); ++q) {
      const Mat2 dF = Fk[q] - fp.F[q];
      Gradient3 dG;
      for (int k = 0; k < 2; ++k) dG.slice[k] = Gk[q].slice[k] - Gp[q].slice[k];
      const Mat2 sel = stress_derivatives_elastic(Fk[q]);
      dml.add(w * (ddot(sel, dF) + ddot(hyper_gradient(mat_, Gk[q]), dG)));
      dme.add(w * (elastic_energy(mat_, Fk[q]) + hyper_energy(mat_, Gk[q]) - elastic_energy(mat_, fp.F[q]) -
                   hyper_energy(mat_, Gp[q])));
      diss.add(w * tau_ * dissipation(mat_, fp.F[q], (1.0 / tau_) * dF, fp.theta[q]).xi);
      cpl.add(w * ddot(coupling_dF(mat_, Fk[q], fp.theta[q], cfg_.eps), dF));
    }
    EnergyIdentity e;
    e.dM_linear = dml.value();
    e.dM_exact = dme.value();
    e.dissipation = diss.value();
    e.coupling_work = cpl.value();
    e.load_work = load.dot(dy);
    for (int d : free_) e.increment_l1 += std::fabs(dy[d]);
    return e;
  }

  StepRecord initial_record(const State& s) const {
    StepRecord r;
    r.t = s.t;
    r.energy = integrate_energy(grid_, ops_, s, mat_, cfg_.eps);
    r.theta_min = s.theta.minCoeff();
    r.theta_max = s.theta.maxCoeff();
    return r;
  }

  /// Runs all steps. The observer, if given, sees every completed step.
  Trajectory run(const std::function<void(const State&, const StepRecord&)>& observer = {}) const {
    Trajectory tr;
    tr.nx = cfg_.nx;
    tr.ny = cfg_.ny;
    tr.dt = tau_;
    tr.eps = cfg_.eps;
    tr.states.push_back(initial_state());
    tr.records.push_back(initial_record(tr.states.back()));
    if (observer) observer(tr.states.back(), tr.records.back());
    const int n = cfg_.num_steps();
    double diss_cum = 0.0;
    for (int k = 1; k <= n; ++k) {
      const State& prev = tr.states[k - 1];
      const Vector* older = k >= 2 ? &tr.states[k - 2].y : nullptr;
      const double t_k = k * tau_;
      StepRecord rec;
      State next;
      try {
        const FrozenState fp = freeze(prev);
        const MechanicalResult mr = mechanical_step(prev, fp, older, t_k);
        const HeatResult hr = heat_step(prev, fp, mr.y, t_k);
        const EnergyIdentity ei = energy_identity(prev, fp, mr.y, t_k);
        next.y = mr.y;
        next.theta = hr.theta;
        next.t = t_k;
        rec.step = k;
        rec.t = t_k;
        rec.mech_iters = mr.iterations;
        rec.mech_gnorm = mr.gnorm;
        rec.phi_before = mr.phi_before;
        rec.phi_after = mr.phi_after;
        rec.descent_slack = mr.phi_after - mr.phi_before;
        rec.diss_increment = ei.dissipation;
        diss_cum += ei.dissipation;
        rec.diss_cum = diss_cum;
        rec.energy_residual = ei.residual();
        rec.full_residual = ei.full_residual();
        rec.heat_res = hr.residual;
        rec.heat_energy_res = hr.energy_residual;
        rec.heat_iters = hr.iterations;
        rec.heat_positive_offdiag = hr.positive_offdiag;
        rec.energy_bound = 10.0 * (mr.gtol_abs * ei.increment_l1 + hr.energy_residual);
        rec.theta_flat = boundary_temperature(t_k);
        rec.theta_min = next.theta.minCoeff();
        rec.theta_max = next.theta.maxCoeff();
        if (!(rec.theta_min > 0.0))
          throw SolverError("non-positive nodal temperature " + fmt_short(rec.theta_min));
        rec.energy = integrate_energy(grid_, ops_, next, mat_, cfg_.eps);
      } catch (const SolverError& e) {
        throw SolverError("step " + std::to_string(k) + " (t = " + fmt_short(t_k) + "): " + e.what());
      } catch (const DomainError& e) {
        throw SolverError("step " + std::to_string(k) + " (t = " + fmt_short(t_k) + "): " + e.what());
      }
      tr.states.push_back(std::move(next));
      tr.records.push_back(rec);
      if (observer) observer(tr.states.back(), tr.records.back());
    }
    return tr;
  }

 private:
  Mat2 stress_derivatives_elastic(const Mat2& F) const {
    return hat_energy(F, false).d - bump_energy(mat_, F, false).d + volumetric_energy(F, mat_.q, false).d;
  }

  SimConfig cfg_;
  Material mat_;
  Grid2 grid_;
  GridOperators ops_;
  double tau_;
  SparseMatrix Bt_, Hst_;
  std::vector<int> free_;
  std::vector<bool> fixed_mask_;
};

}  // namespace thermovisc
