#pragma once

// Preconditioned limited-memory BFGS with a feasibility-aware backtracking
// line search. A trial point is accepted on the Armijo condition or on the
// approximate Wolfe conditions of Hager and Zhang; the latter keeps the
// iteration moving once function differences reach roundoff.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <string>

#include "errors.hpp"
#include "report.hpp"

namespace thermovisc {

struct LbfgsOptions {
  int memory = 8;
  int max_iter = 500;
  double gtol = 1e-9;         // stop when ||g||_inf <= gtol (1 + |f|)
  double wolfe_slack = 1e-13; // admissible relative increase on approximate-Wolfe steps
  int max_backtracks = 60;
  double c1 = 1e-4, c2 = 0.9;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double gnorm_inf = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// eval(x, g) returns f(x) and fills g; it returns +inf when x is infeasible.
/// precond(v) applies an SPD approximation of the inverse Hessian.
inline LbfgsResult lbfgs_minimize(const Eigen::VectorXd& x0,
                                  const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& eval,
                                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                                  const LbfgsOptions& opt) {
  using Vec = Eigen::VectorXd;
  LbfgsResult r;
  r.x = x0;
  Vec g(x0.size());
  r.f = eval(r.x, g);
  ++r.evaluations;
  if (!std::isfinite(r.f)) throw SolverError("lbfgs: starting point is infeasible");

  std::deque<Vec> S, Y;
  std::deque<double> rho;
  for (;;) {
    r.gnorm_inf = g.lpNorm<Eigen::Infinity>();
    if (r.gnorm_inf <= opt.gtol * (1.0 + std::fabs(r.f))) return r;
    if (r.iterations >= opt.max_iter)
      throw SolverError("lbfgs: no convergence after " + std::to_string(opt.max_iter) + " iterations (|g|_inf = " +
                        fmt_short(r.gnorm_inf) + ")");

    // Two-loop recursion.
    Vec q = g;
    std::vector<double> a(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      a[i] = rho[i] * S[i].dot(q);
      q -= a[i] * Y[i];
    }
    Vec d = precond(q);
    if (!S.empty()) {
      const Vec Py = precond(Y.back());
      const double gamma = S.back().dot(Y.back()) / Y.back().dot(Py);
      if (gamma > 0.0 && std::isfinite(gamma)) d *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double b = rho[i] * Y[i].dot(d);
      d += (a[i] - b) * S[i];
    }
    d = -d;
    double gd = g.dot(d);
    if (!(gd < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d = -precond(g);
      gd = g.dot(d);
      if (!(gd < 0.0)) throw SolverError("lbfgs: preconditioner does not give a descent direction");
    }

    double step = 1.0;
    Vec xn, gn(g.size());
    double fn = 0.0;
    bool accepted = false;
    const double slack = opt.wolfe_slack * (1.0 + std::fabs(r.f));
    for (int k = 0; k < opt.max_backtracks; ++k, step *= 0.5) {
      xn = r.x + step * d;
      fn = eval(xn, gn);
      ++r.evaluations;
      if (!std::isfinite(fn)) continue;
      const double dn = gn.dot(d);
      const bool armijo = fn <= r.f + opt.c1 * step * gd;
      const bool approx_wolfe = fn <= r.f + slack && dn <= (2.0 * opt.c1 - 1.0) * gd && dn >= opt.c2 * gd;
      if (armijo || approx_wolfe) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw SolverError("lbfgs: line search failed after " + std::to_string(opt.max_backtracks) +
                        " backtracks (|g|_inf = " + fmt_short(r.gnorm_inf) + ", f = " + fmt_short(r.f) + ")");

    Vec s = xn - r.x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    r.x = std::move(xn);
    r.f = fn;
    g = std::move(gn);
    ++r.iterations;
  }
}

}  // namespace thermovisc
