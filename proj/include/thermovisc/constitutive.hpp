#pragma once

// Pointwise constitutive functions of the shape-memory thermoviscoelastic
// model: elastic, coupling, hypergradient and free energies with their
// analytic derivatives, internal energy and heat capacity, the inverse
// temperature map, dissipation, conductivity pull-back, dissipation
// truncations, the smooth positive-part regularizer, and the tensors of the
// small-strain limit.
//
// Free energy:
//   W(F, th)      = W_el(F) + W_cpl(F, th)
//   W_el(F)       = W_M(F) = What(F) - g(F) + (1/det F - 1)^q - C1 th_c (1 - log th_c)
//   W_cpl(F, th)  = m(th) g(F) + C1 th (1 - log th),  m = a + s h,  s = eps^(alpha-1) beta0
//   What(F)       = |F^T F - I|^2
//   g(F)          = A cut(|F^T F - I|^2) (tr F^T F - 2)
// so that W_A - W_M = g and W(F, th_c) = What(F) + (1/det F - 1)^q.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "material.hpp"
#include "tensor.hpp"

namespace thermovisc {

/// A scalar function of one variable with derivatives up to third order.
struct Profile {
  double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

namespace detail {

inline void require_positive_det(const Mat2& F, const char* where) {
  if (!(det(F) > 0.0)) throw DomainError(std::string(where) + ": det(F) must be positive");
}
inline void require_nonneg_theta(double theta, const char* where) {
  if (!(theta >= 0.0)) throw DomainError(std::string(where) + ": theta must be nonnegative");
}

// f(t) = exp(-1/t) for t > 0 and its first two derivatives.
struct ExpKernel {
  double f = 0.0, f1 = 0.0, f2 = 0.0;
};
inline ExpKernel exp_kernel(double t) {
  if (t <= 0.0) return {};
  const double f = std::exp(-1.0 / t);
  const double t2 = t * t;
  return {f, f / t2, f * (1.0 - 2.0 * t) / (t2 * t2)};
}

}  // namespace detail

/// C-infinity cutoff of s >= 0: 1 on [0, width], 0 on [4 width, inf).
inline Profile cutoff(double s, double width) {
  const double x = s / width;
  if (x <= 1.0) return {1.0, 0.0, 0.0, 0.0};
  if (x >= 4.0) return {};
  const double t = (4.0 - x) / 3.0;
  const auto u = detail::exp_kernel(t);
  const auto w = detail::exp_kernel(1.0 - t);
  const double S = u.f + w.f;
  const double N = u.f1 * w.f + u.f * w.f1;
  const double dN = u.f2 * w.f - u.f * w.f2;
  const double dS = u.f1 - w.f1;
  const double psi1 = N / (S * S);
  const double psi2 = dN / (S * S) - 2.0 * N * dS / (S * S * S);
  const double dt = -1.0 / (3.0 * width);
  return {u.f / S, psi1 * dt, psi2 * dt * dt, 0.0};
}

/// Austenite volume fraction a(theta) = 1 - (1 - theta/theta_c)^4 below theta_c, 1 above.
inline Profile phase_fraction(double theta, double theta_c) {
  if (theta >= theta_c) return {1.0, 0.0, 0.0, 0.0};
  const double r = 1.0 - theta / theta_c;
  const double r2 = r * r;
  return {1.0 - r2 * r2, 4.0 * r2 * r / theta_c, -12.0 * r2 / (theta_c * theta_c),
          24.0 * r / (theta_c * theta_c * theta_c)};
}

/// h(theta) = (theta - theta_c)(1 - rho^2)^4, rho = 2(theta - theta_c)/theta_c.
/// C^3, h(theta_c) = 0, h'(theta_c) = 1, supported in [theta_c/2, 3 theta_c/2].
inline Profile coupling_bump(double theta, double theta_c) {
  const double w = 0.5 * theta_c;
  const double rho = (theta - theta_c) / w;
  if (std::fabs(rho) >= 1.0) return {};
  const double b = 1.0 - rho * rho;
  const double b2 = b * b;
  const double k0 = rho * b2 * b2;
  const double k1 = b2 * b * (1.0 - 9.0 * rho * rho);
  const double k2 = -24.0 * rho * b2 * (1.0 - 3.0 * rho * rho);
  const double k3 = -24.0 * b * (1.0 - 14.0 * rho * rho + 21.0 * rho * rho * rho * rho);
  return {w * k0, k1, k2 / w, k3 / (w * w)};
}

/// Temperature weight m = a + s h multiplying g(F) in the coupling energy.
inline Profile coupling_weight(const Material& mat, double theta, double eps) {
  Profile m = phase_fraction(theta, mat.theta_c);
  const double s = mat.coupling_scale(eps);
  if (s != 0.0) {
    const Profile h = coupling_bump(theta, mat.theta_c);
    m.v += s * h.v;
    m.d1 += s * h.d1;
    m.d2 += s * h.d2;
    m.d3 += s * h.d3;
  }
  return m;
}

/// Value, gradient and Hessian of a matrix function.
struct MatFunction {
  double v = 0.0;
  Mat2 d;
  Tensor4 dd;
};

/// What(F) = |F^T F - I|^2.
inline MatFunction hat_energy(const Mat2& F, bool with_hessian = true) {
  const Mat2 E = transpose(F) * F - Mat2::identity();
  MatFunction r;
  r.v = ddot(E, E);
  r.d = 4.0 * (F * E);
  if (with_hessian) {
    const Mat2 FFt = F * transpose(F);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            double val = F(a, d) * F(c, b);
            if (a == c) val += E(d, b);
            if (b == d) val += FFt(a, c);
            r.dd(a, b, c, d) = 4.0 * val;
          }
  }
  return r;
}

/// (1/det F - 1)^q.
inline MatFunction volumetric_energy(const Mat2& F, int q, bool with_hessian = true) {
  const double J = det(F);
  const double x = 1.0 / J - 1.0;
  const double xq2 = q >= 2 ? std::pow(x, q - 2) : 0.0;
  const double xq1 = xq2 * x;
  const double V1 = -q * xq1 / (J * J);
  MatFunction r;
  r.v = xq1 * x;
  const Mat2 cof = cofactor(F);
  r.d = V1 * cof;
  if (with_hessian) {
    const double V2 = q * (q - 1) * xq2 / (J * J * J * J) + 2.0 * q * xq1 / (J * J * J);
    r.dd = V2 * Tensor4::outer(cof, cof);
    r.dd(0, 0, 1, 1) += V1;
    r.dd(1, 1, 0, 0) += V1;
    r.dd(0, 1, 1, 0) -= V1;
    r.dd(1, 0, 0, 1) -= V1;
  }
  return r;
}

/// g(F) = A cut(|F^T F - I|^2) (|F|^2 - 2); g(Id) = 0, grad g(Id) = 2A Id.
inline MatFunction bump_energy(const Material& mat, const Mat2& F, bool with_hessian = true) {
  MatFunction r;
  const double A = mat.bump_amplitude;
  if (A == 0.0) return r;
  const MatFunction s = hat_energy(F, with_hessian);
  const Profile c = cutoff(s.v, mat.bump_width);
  if (c.v == 0.0 && c.d1 == 0.0 && c.d2 == 0.0) return r;
  const double t = ddot(F, F) - 2.0;
  const Mat2 dt = 2.0 * F;
  r.v = A * c.v * t;
  r.d = A * (c.d1 * t * s.d + c.v * dt);
  if (with_hessian) {
    Tensor4 H = (c.d2 * t) * Tensor4::outer(s.d, s.d);
    H += c.d1 * (Tensor4::outer(s.d, dt) + Tensor4::outer(dt, s.d));
    H += (c.d1 * t) * s.dd;
    H += (2.0 * c.v) * Tensor4::identity();
    r.dd = A * H;
  }
  return r;
}

/// Sup of |g| over GL+(2): on the cutoff support |F^T F - I| <= 2 sqrt(width),
/// hence |tr(F^T F) - 2| <= sqrt(2) |F^T F - I|.
inline double bump_bound(const Material& mat) {
  return mat.bump_amplitude * 2.0 * std::sqrt(2.0) * std::sqrt(mat.bump_width);
}

inline double critical_constant(const Material& mat) {
  return mat.C1 * mat.theta_c * (1.0 - std::log(mat.theta_c));
}

// ---------------------------------------------------------------------------
// Energies

inline double elastic_energy(const Material& mat, const Mat2& F) {
  detail::require_positive_det(F, "elastic_energy");
  return hat_energy(F, false).v - bump_energy(mat, F, false).v + volumetric_energy(F, mat.q, false).v -
         critical_constant(mat);
}

/// C1 theta (1 - log theta), continuously extended by 0 at theta = 0.
inline double entropic_term(double C1, double theta) {
  return theta > 0.0 ? C1 * theta * (1.0 - std::log(theta)) : 0.0;
}

inline double coupling_energy(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "coupling_energy");
  detail::require_nonneg_theta(theta, "coupling_energy");
  const double g = bump_energy(mat, F, false).v;
  return coupling_weight(mat, theta, eps).v * g + entropic_term(mat.C1, theta);
}

inline double free_energy(const Material& mat, const Mat2& F, double theta, double eps) {
  return elastic_energy(mat, F) + coupling_energy(mat, F, theta, eps);
}

/// H(G) = c_H |G|^p.
inline double hyper_energy(const Material& mat, const Gradient3& G) {
  return mat.c_H * std::pow(ddot(G, G), 0.5 * mat.p);
}
inline Gradient3 hyper_gradient(const Material& mat, const Gradient3& G) {
  const double n2 = ddot(G, G);
  return (mat.c_H * mat.p * std::pow(n2, 0.5 * (mat.p - 2))) * G;
}

/// d_F of the full free energy W(F, theta); valid down to theta = 0.
inline Mat2 free_energy_dF(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "free_energy_dF");
  detail::require_nonneg_theta(theta, "free_energy_dF");
  const double m = coupling_weight(mat, theta, eps).v;
  return hat_energy(F, false).d + (m - 1.0) * bump_energy(mat, F, false).d + volumetric_energy(F, mat.q, false).d;
}

/// W and d_F W in one pass; valid down to theta = 0.
struct EnergyAndStress {
  double W = 0.0;
  Mat2 dF;
};
inline EnergyAndStress free_energy_with_dF(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "free_energy_with_dF");
  detail::require_nonneg_theta(theta, "free_energy_with_dF");
  const double m = coupling_weight(mat, theta, eps).v;
  const MatFunction w = hat_energy(F, false);
  const MatFunction g = bump_energy(mat, F, false);
  const MatFunction v = volumetric_energy(F, mat.q, false);
  return {w.v + (m - 1.0) * g.v + v.v - critical_constant(mat) + entropic_term(mat.C1, theta),
          w.d + (m - 1.0) * g.d + v.d};
}

/// d_F W_cpl(F, theta) = m(theta) grad g(F); vanishes at theta = 0.
inline Mat2 coupling_dF(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "coupling_dF");
  detail::require_nonneg_theta(theta, "coupling_dF");
  return coupling_weight(mat, theta, eps).v * bump_energy(mat, F, false).d;
}

/// d_{F theta} W_cpl(F, theta) = m'(theta) grad g(F).
inline Mat2 coupling_dFtheta(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "coupling_dFtheta");
  detail::require_nonneg_theta(theta, "coupling_dFtheta");
  return coupling_weight(mat, theta, eps).d1 * bump_energy(mat, F, false).d;
}

struct StressDerivatives {
  Mat2 dF_W;               // d_F W
  double dtheta_W = 0.0;   // d_theta W
  Tensor4 dFF_W;           // d_FF W
  Mat2 dFtheta_W;          // d_{F theta} W
  double dthetatheta_W = 0.0;
  Mat2 dFthetatheta_W;
};

/// Closed-form derivatives of W. The temperature-only terms live in W_cpl,
/// so every theta-derivative of W equals that of W_cpl.
inline StressDerivatives stress_derivatives(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "stress_derivatives");
  if (!(theta > 0.0)) throw DomainError("stress_derivatives: theta-derivatives require theta > 0");
  const Profile m = coupling_weight(mat, theta, eps);
  const MatFunction w = hat_energy(F);
  const MatFunction g = bump_energy(mat, F);
  const MatFunction vol = volumetric_energy(F, mat.q);
  StressDerivatives r;
  r.dF_W = w.d + (m.v - 1.0) * g.d + vol.d;
  r.dFF_W = w.dd + (m.v - 1.0) * g.dd + vol.dd;
  r.dtheta_W = m.d1 * g.v - mat.C1 * std::log(theta);
  r.dthetatheta_W = m.d2 * g.v - mat.C1 / theta;
  r.dFtheta_W = m.d1 * g.d;
  r.dFthetatheta_W = m.d2 * g.d;
  return r;
}

// ---------------------------------------------------------------------------
// Internal energy and heat capacity

/// W_in = W_cpl - theta d_theta W_cpl = (m - theta m') g + C1 theta.
inline double internal_energy(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "internal_energy");
  detail::require_nonneg_theta(theta, "internal_energy");
  if (theta == 0.0) return 0.0;
  const Profile m = coupling_weight(mat, theta, eps);
  return (m.v - theta * m.d1) * bump_energy(mat, F, false).v + mat.C1 * theta;
}

/// c_V = d_theta W_in = C1 - theta m''(theta) g(F).
inline double heat_capacity(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "heat_capacity");
  detail::require_nonneg_theta(theta, "heat_capacity");
  const Profile m = coupling_weight(mat, theta, eps);
  return mat.C1 - theta * m.d2 * bump_energy(mat, F, false).v;
}

/// Heat capacity with its partial derivatives, used for spatial gradients of 1/c_V.
struct HeatCapacity {
  double cV = 0.0;
  double dtheta = 0.0;  // = d_theta^2 W_in
  Mat2 dF;
};
inline HeatCapacity heat_capacity_derivatives(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "heat_capacity_derivatives");
  detail::require_nonneg_theta(theta, "heat_capacity_derivatives");
  const Profile m = coupling_weight(mat, theta, eps);
  const MatFunction g = bump_energy(mat, F, false);
  return {mat.C1 - theta * m.d2 * g.v, -(m.d2 + theta * m.d3) * g.v, (-theta * m.d2) * g.d};
}

/// d_F W_in = (m - theta m') grad g.
inline Mat2 internal_energy_dF(const Material& mat, const Mat2& F, double theta, double eps) {
  detail::require_positive_det(F, "internal_energy_dF");
  detail::require_nonneg_theta(theta, "internal_energy_dF");
  const Profile m = coupling_weight(mat, theta, eps);
  return (m.v - theta * m.d1) * bump_energy(mat, F, false).d;
}

/// sup_theta theta |m''(theta)|, sampled densely on the support of a'' and h''
/// with a 5% margin.
inline double theta_curvature_bound(const Material& mat, double eps) {
  double sup = 0.0;
  constexpr int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double th = 2.0 * mat.theta_c * i / n;
    sup = std::max(sup, th * std::fabs(coupling_weight(mat, th, eps).d2));
  }
  return 1.05 * sup;
}

/// Interval guaranteed to contain c_V(F, theta) at this F for every theta.
inline std::pair<double, double> heat_capacity_bracket(const Material& mat, const Mat2& F, double eps) {
  const double spread = theta_curvature_bound(mat, eps) * std::fabs(bump_energy(mat, F, false).v);
  return {mat.C1 - spread, mat.C1 + spread};
}

/// Inverse of theta -> W_in(F, theta). Safeguarded Newton inside the bracket
/// [w / c_hi, w / c_lo]; converges to |W_in(F, theta) - w| <= 1e-12 max(1, w).
inline double psi_inverse(const Material& mat, const Mat2& F, double w, double eps) {
  detail::require_positive_det(F, "psi_inverse");
  if (!(w >= 0.0)) throw DomainError("psi_inverse: internal energy must be nonnegative");
  if (w == 0.0) return 0.0;
  const double tol = 1e-12 * std::max(1.0, w);
  auto [c_lo, c_hi] = heat_capacity_bracket(mat, F, eps);
  if (!(c_lo > 0.0)) throw SolverError("psi_inverse: heat capacity bracket is not positive");
  double lo = w / c_hi, hi = w / c_lo;
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = internal_energy(mat, F, theta, eps) - w;
    if (std::fabs(r) <= tol) return theta;
    if (r > 0.0)
      hi = theta;
    else
      lo = theta;
    const double step = r / heat_capacity(mat, F, theta, eps);
    double next = theta - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      theta = next;
      if (std::fabs(internal_energy(mat, F, theta, eps) - w) <= tol) return theta;
      break;
    }
    theta = next;
  }
  throw SolverError("psi_inverse: no convergence (bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "], w = " + std::to_string(w) + ")");
}

// ---------------------------------------------------------------------------
// Dissipation

/// Scalar multiplier of D(C, theta) = d(theta) Id_sym.
inline double viscosity(const Material& mat, double theta) { return 1.0 + mat.eta_D / (1.0 + theta); }

struct Dissipation {
  double R = 0.0;   // potential 1/2 Cdot : D Cdot
  double xi = 0.0;  // rate d_Fdot R : Fdot = 2 R
  Mat2 stress;      // d_Fdot R = 2 F (D Cdot)
};

inline Dissipation dissipation(const Material& mat, const Mat2& F, const Mat2& Fdot, double theta) {
  detail::require_positive_det(F, "dissipation");
  detail::require_nonneg_theta(theta, "dissipation");
  const Mat2 FtFd = transpose(F) * Fdot;
  const Mat2 Cdot = FtFd + transpose(FtFd);
  const double d = viscosity(mat, theta);
  const double cc = ddot(Cdot, Cdot);
  return {0.5 * d * cc, d * cc, (2.0 * d) * (F * Cdot)};
}

/// d^2_Fdot R(F, ., theta): constant since R is quadratic in Fdot.
inline Tensor4 dissipation_hessian(const Material& mat, const Mat2& F, double theta) {
  const double d = viscosity(mat, theta);
  std::array<Mat2, 4> L;
  for (int p = 0; p < 4; ++p) {
    Mat2 E;
    E.a[p] = 1.0;
    const Mat2 FtE = transpose(F) * E;
    L[p] = FtE + transpose(FtE);
  }
  Tensor4 H;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) H.t[p * 4 + q] = d * ddot(L[p], L[q]);
  return H;
}

/// xi^(alpha): identity below Lambda, Lambda^(1-alpha/2) xi^(alpha/2) above.
inline double truncate_xi(double xi, double alpha, double Lambda) {
  if (xi <= Lambda || alpha == 2.0) return xi;
  return std::pow(Lambda, 1.0 - 0.5 * alpha) * std::pow(xi, 0.5 * alpha);
}

/// xi^reg: identity below 1/nu, nu^(1/alpha - 1) xi^(1/alpha) above.
inline double regularize_xi(double xi_alpha, double alpha, double nu) {
  if (xi_alpha <= 1.0 / nu) return xi_alpha;
  return std::pow(nu, 1.0 / alpha - 1.0) * std::pow(xi_alpha, 1.0 / alpha);
}

// ---------------------------------------------------------------------------
// Conductivity

/// Spatial conductivity K(theta) = kappa0 (1 + eta_K theta / (1 + theta)) Id.
inline double spatial_conductivity(const Material& mat, double theta) {
  return mat.kappa0 * (1.0 + mat.eta_K * theta / (1.0 + theta));
}

/// Referential pull-back det(F) F^-1 K(theta) F^-T.
inline Mat2 conductivity(const Material& mat, const Mat2& F, double theta) {
  detail::require_positive_det(F, "conductivity");
  detail::require_nonneg_theta(theta, "conductivity");
  const Mat2 Finv = inverse(F);
  return (det(F) * spatial_conductivity(mat, theta)) * (Finv * transpose(Finv));
}

// ---------------------------------------------------------------------------
// Smooth positive part

/// phi_beta(s) = (s^4 + beta^4)^(1/4) - beta for s > 0, else 0; first two derivatives.
inline Profile phi_beta(double s, double beta) {
  if (s <= 0.0) return {};
  const double r = s / beta;
  const double x = r * r * r * r;
  if (!std::isfinite(x)) return {s - beta, 1.0, 0.0, 0.0};
  const double root = std::pow(1.0 + x, 0.25);
  const double value = beta * std::expm1(0.25 * std::log1p(x));
  const double inv34 = 1.0 / (root * root * root);
  const double d1 = r * r * r * inv34;
  const double d2 = 3.0 * r * r * inv34 / ((1.0 + x) * beta);
  return {value, d1, d2, 0.0};
}

// ---------------------------------------------------------------------------
// Small-strain limit

struct LinearizedTensors {
  Tensor4 CW;     // d_FF W(Id, theta_c)
  Tensor4 CD;     // 4 D(Id, theta_c)
  Mat2 Bhat;      // lim eps^(1-alpha) d_{F theta} W_cpl(Id, theta_c)
  double cV_bar = 0.0;
  Mat2 K_c;       // K(theta_c)
  Mat2 B_alpha;   // Bhat if alpha = 1, else 0
  Tensor4 CD_alpha;  // CD if alpha = 2, else 0
  double alpha = 2.0;
  double theta_c = 1.0;
};

/// Tensors of the small-strain limit. W(F, theta_c) does not depend on eps
/// (h(theta_c) = 0), so CW is evaluated at eps = 1.
inline LinearizedTensors linearized_tensors(const Material& mat, double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0))
    throw DomainError("linearized_tensors: alpha must lie in [1, 2]; the limiting coupling is infinite for "
                      "alpha < 1 and the limiting viscous heating is infinite for alpha > 2");
  const Mat2 I = Mat2::identity();
  LinearizedTensors t;
  t.alpha = alpha;
  t.theta_c = mat.theta_c;
  t.CW = stress_derivatives(mat, I, mat.theta_c, 1.0).dFF_W;
  t.CD = 4.0 * viscosity(mat, mat.theta_c) * Tensor4::identity_sym();
  t.Bhat = mat.beta0 * bump_energy(mat, I, false).d;
  t.cV_bar = heat_capacity(mat, I, mat.theta_c, 1.0);
  t.K_c = spatial_conductivity(mat, mat.theta_c) * I;
  t.B_alpha = alpha == 1.0 ? t.Bhat : Mat2::zero();
  t.CD_alpha = alpha == 2.0 ? t.CD : Tensor4{};
  return t;
}

}  // namespace thermovisc
