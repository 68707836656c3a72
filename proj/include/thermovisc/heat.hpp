#pragma once

// Mass-lumped implicit heat step on Q1 elements:
//   m_i (theta_i - theta_prev_i) / dt + (K theta)_i + kappa l_i theta_i
//       = kappa l_i theta_flat_i + s_i + b_i theta_i,
// with m_i = int c_V phi_i, l_i the lumped boundary length, s_i = int source phi_i
// and b_i = int beta phi_i the lumped adiabatic coefficient. A nonnegative b_i
// is taken explicitly (b_i theta_prev_i on the right); a negative one is
// added to the diagonal. Both choices keep nonpositive off-diagonals and
// positive diagonals, so the matrix is an M-matrix whenever K is.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace thermovisc {

struct HeatCoefficients {
  std::vector<double> cV;          // heat capacity per qp
  std::vector<Mat2> conductivity;  // referential conductivity per qp
  std::vector<double> source;      // dissipative heat source per qp
  std::vector<double> adiabatic;   // coefficient of theta in the adiabatic source per qp
};

struct HeatSystem {
  SparseMatrix A;
  Vector rhs;
  Vector mass;      // lumped c_V mass m_i
  Vector boundary;  // kappa l_i
  Vector source;    // s_i
  Vector adiabatic; // b_i
};

inline HeatSystem assemble_heat_system(const Grid2& g, const HeatCoefficients& c, const Vector& theta_prev,
                                       const Vector& theta_flat, double kappa, double dt) {
  if (!(dt > 0.0)) throw DomainError("assemble_heat_system: dt must be positive");
  require_size(theta_prev, g.num_nodes(), "assemble_heat_system");
  require_size(theta_flat, g.num_nodes(), "assemble_heat_system");
  const auto nq = static_cast<std::size_t>(g.num_qp());
  if (c.cV.size() != nq || c.conductivity.size() != nq || c.source.size() != nq || c.adiabatic.size() != nq)
    throw DomainError("assemble_heat_system: per-qp coefficient arrays do not match the grid");

  HeatSystem s;
  s.mass = lumped_integral(g, [&](int q) { return c.cV[q]; });
  s.source = lumped_integral(g, [&](int q) { return c.source[q]; });
  s.adiabatic = lumped_integral(g, [&](int q) { return c.adiabatic[q]; });
  s.boundary = kappa * boundary_lumped_length(g);
  SparseMatrix K = assemble_scalar_stiffness(g, [&](int q) { return c.conductivity[q]; });

  Vector diag = s.mass / dt + s.boundary;
  s.rhs = s.mass.cwiseProduct(theta_prev) / dt + s.boundary.cwiseProduct(theta_flat) + s.source;
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (s.adiabatic[i] >= 0.0)
      s.rhs[i] += s.adiabatic[i] * theta_prev[i];
    else
      diag[i] -= s.adiabatic[i];
  }
  SparseMatrix D(g.num_nodes(), g.num_nodes());
  D.reserve(Eigen::VectorXi::Constant(g.num_nodes(), 1));
  for (int i = 0; i < g.num_nodes(); ++i) D.insert(i, i) = diag[i];
  s.A = K + D;
  return s;
}

/// Number of positive off-diagonal entries (zero for an M-matrix pattern).
inline int positive_offdiagonals(const SparseMatrix& A, double tol = 1e-14) {
  int n = 0;
  for (int r = 0; r < A.outerSize(); ++r) {
    double scale = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (it.col() == r) scale = std::fabs(it.value());
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (it.col() != r && it.value() > tol * scale) ++n;
  }
  return n;
}

struct LinearSolve {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // ||A x - b|| / ||b||
};

/// Diagonally preconditioned CG; a failure to reach the tolerance is an error.
inline LinearSolve solve_spd(const SparseMatrix& A, const Vector& b, const Vector& guess, double tol, int max_iter,
                             const char* what) {
  LinearSolve r;
  const double bn = b.norm();
  if (bn == 0.0) {
    r.x = Vector::Zero(b.size());
    return r;
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iter);
  cg.compute(A);
  r.x = cg.solveWithGuess(b, guess);
  r.iterations = static_cast<int>(cg.iterations());
  r.residual = (A * r.x - b).norm() / bn;
  if (cg.info() != Eigen::Success && r.residual > tol)
    throw SolverError(std::string(what) + ": CG did not converge (relative residual " + fmt_short(r.residual) +
                      " after " + std::to_string(r.iterations) + " iterations)");
  return r;
}

inline LinearSolve solve_heat_system(const HeatSystem& s, const Vector& guess, double tol, int max_iter) {
  return solve_spd(s.A, s.rhs, guess, tol, max_iter, "heat step");
}

}  // namespace thermovisc
