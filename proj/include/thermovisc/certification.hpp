#pragma once

// Numerical certification of a Material: samples (F, Fdot, theta, eps) and
// measures every structural inequality the model relies on, plus finite
// difference checks of all analytic derivatives, the inverse temperature map
// and the smooth positive-part regularizer.
// Sampling distribution (fixed, seeded):
//   F     = Q (Id + P) diag(s1, s2), P_ij ~ U(-0.3, 0.3), log s_i ~ U(log 0.4, log 2.5),
//           Q a uniform rotation; rejected unless det F in [0.2, 5]
//   Fdot  = entries ~ U(-1, 1)
//   theta = log-uniform on [1e-4, 1e2]
//   eps   in {1, 1/2, 1/4, 1/8}

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "constitutive.hpp"
#include "report.hpp"

namespace thermovisc {

/// Constants measured by validate_material.
struct CertifiedConstants {
  double C2 = 0.0;  // sup (|m'| + |m'''|)(theta v 1) and |m''|(theta v 1)^2 over the eps ladder
  double C4 = 0.0;  // sup |g|
  double C5 = 0.0;  // sup |d^2 g|
  double c0_lower = 0.0;  // W_el >= c0 (|F|^2 + det^-q) - C0
  double C0_lower = 0.0;
  double cV_min = 0.0, cV_max = 0.0;  // sampled heat capacity range
};

struct CertificationOptions {
  int sample_budget = 10000;
  std::uint64_t seed = 12345;
  double ratio_cap = 1e3;   // admissible size of a measured constant
  double fd_step = 1e-5;
  double fd_tol = 1e-6;
  double frame_tol = 1e-10;
  double roundtrip_tol = 1e-10;
};

namespace certify {

inline const std::array<double, 4>& eps_ladder() {
  static const std::array<double, 4> e{1.0, 0.5, 0.25, 0.125};
  return e;
}

inline std::string describe(const Mat2& F) {
  return "F=[" + fmt_short(F(0, 0)) + "," + fmt_short(F(0, 1)) + ";" + fmt_short(F(1, 0)) + "," +
         fmt_short(F(1, 1)) + "]";
}
inline std::string describe(const Mat2& F, double theta, double eps) {
  return describe(F) + " theta=" + fmt_short(theta) + " eps=" + fmt_short(eps);
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Mat2 deformation(double det_lo = 0.2, double det_hi = 5.0) {
    std::uniform_real_distribution<double> pert(-0.3, 0.3), ls(std::log(0.4), std::log(2.5)),
        ang(-M_PI, M_PI);
    for (;;) {
      Mat2 P{{pert(rng_), pert(rng_), pert(rng_), pert(rng_)}};
      Mat2 S = Mat2::diag(std::exp(ls(rng_)), std::exp(ls(rng_)));
      Mat2 F = Mat2::rotation(ang(rng_)) * (Mat2::identity() + P) * S;
      const double J = det(F);
      if (J >= det_lo && J <= det_hi) return F;
    }
  }
  Mat2 rate() {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return Mat2{{u(rng_), u(rng_), u(rng_), u(rng_)}};
  }
  Mat2 rotation() {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    return Mat2::rotation(ang(rng_));
  }
  double temperature(double lo = 1e-4, double hi = 1e2) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng_));
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double eps() { return eps_ladder()[std::uniform_int_distribution<int>(0, 3)(rng_)]; }
  Gradient3 second_gradient(double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Gradient3 G;
    for (auto& s : G.slice)
      for (auto& x : s.a) x = u(rng_);
    return G;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Running supremum with the witness of the worst sample.
struct Sup {
  double value = -std::numeric_limits<double>::infinity();
  std::string witness;
  void update(double v, const std::function<std::string()>& w) {
    if (!(v <= value)) {
      value = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
      witness = w();
    }
  }
};
struct Inf {
  double value = std::numeric_limits<double>::infinity();
  std::string witness;
  void update(double v, const std::function<std::string()>& w) {
    if (!(v >= value)) {
      value = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
      witness = w();
    }
  }
};

inline double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

/// Central differences of a scalar function of F.
inline Mat2 fd_gradient(const std::function<double(const Mat2&)>& f, const Mat2& F, double h) {
  Mat2 g;
  for (int p = 0; p < 4; ++p) {
    Mat2 Fp = F, Fm = F;
    Fp.a[p] += h;
    Fm.a[p] -= h;
    g.a[p] = (f(Fp) - f(Fm)) / (2.0 * h);
  }
  return g;
}
inline Tensor4 fd_hessian(const std::function<Mat2(const Mat2&)>& f, const Mat2& F, double h) {
  Tensor4 T;
  for (int q = 0; q < 4; ++q) {
    Mat2 Fp = F, Fm = F;
    Fp.a[q] += h;
    Fm.a[q] -= h;
    const Mat2 d = (f(Fp) - f(Fm)) / (2.0 * h);
    for (int p = 0; p < 4; ++p) T.t[p * 4 + q] = d.a[p];
  }
  return T;
}

inline double rel_err(double a, double fd) { return std::fabs(a - fd) / std::max(1.0, std::fabs(a)); }
inline double rel_err(const Mat2& a, const Mat2& fd) { return norm(a - fd) / std::max(1.0, norm(a)); }
inline double rel_err(const Tensor4& a, const Tensor4& fd) { return norm(a - fd) / std::max(1.0, norm(a)); }

}  // namespace certify

/// sup over theta of the a-family constants for the eps ladder.
inline double certified_C2(const Material& mat) {
  double C2 = 0.0;
  const int n = 20000;
  for (double eps : certify::eps_ladder())
    for (int i = 0; i <= n; ++i) {
      const double th = 4.0 * std::max(1.0, mat.theta_c) * i / n;
      const Profile m = coupling_weight(mat, th, eps);
      const double tv = std::max(th, 1.0);
      C2 = std::max({C2, (std::fabs(m.d1) + std::fabs(m.d3)) * tv, std::fabs(m.d2) * tv * tv});
    }
  return std::max(1.0, C2);
}

/// Structural inequalities of the free energy, dissipation and conductivity.
inline Report validate_material(const Material& mat, const CertificationOptions& opt = {},
                                CertifiedConstants* out_constants = nullptr) {
  using certify::describe;
  using certify::ratio;
  using R = Check::Rel;

  Report rep;
  rep.title = "material certification";
  if (opt.sample_budget < 1000) throw DomainError("validate_material: sample_budget must be >= 1000");
  certify::Sampler smp(opt.seed);
  const int N = opt.sample_budget;
  const double th_c = mat.theta_c;
  const double cap = opt.ratio_cap;

  // Phase fraction a.
  {
    const Profile a0 = phase_fraction(0.0, th_c), ac = phase_fraction(th_c, th_c);
    rep.add(Check::make("a.zero_at_0", std::fabs(a0.v), R::LE, 0.0));
    rep.add(Check::make("a.one_at_theta_c", std::fabs(ac.v - 1.0), R::LE, 0.0));
    rep.add(Check::make("a.flat_at_theta_c", std::fabs(phase_fraction(th_c * (1 - 1e-15), th_c).d1), R::LE, 1e-12));
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double a = phase_fraction(3.0 * th_c * i / 10000, th_c).v;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    rep.add(Check::make("a.range_min", lo, R::GE, 0.0));
    rep.add(Check::make("a.range_max", hi, R::LE, 1.0));
  }

  const double C2 = certified_C2(mat);
  const double C4 = bump_bound(mat);
  CertifiedConstants K;
  K.C2 = C2;
  K.C4 = C4;
  K.c0_lower = std::min(1.0 / 32.0, std::pow(2.0, -mat.q));
  K.C0_lower = 1.1 + C4 + std::fabs(critical_constant(mat));
  rep.note("const.C2", C2);
  rep.note("const.C4", C4);
  rep.note("const.W3_c0", K.c0_lower);
  rep.note("const.W3_C0", K.C0_lower);
  rep.note("const.W4_c0", 1.0);
  rep.note("const.Lambda", mat.Lambda);
  const double cV_lo = mat.C1 - C2 * C4, cV_hi = mat.C1 + C2 * C4;
  rep.add(Check::make("cV.certified_lower_bound", cV_lo, R::GT, 0.0, "C1 - C2*C4"));
  rep.note("cV.certified_interval", "[" + fmt17(cV_lo) + ", " + fmt17(cV_hi) + "]");
  {
    const double need = (1.0 + 4.0 * th_c) * C2 * C4;
    rep.note("info.sufficient_condition_(1+4theta_c)C2C4", need);
    rep.note("info.sufficient_condition_holds", mat.C1 >= need ? "true" : "false");
  }

  certify::Sup g_sup, g2_sup, w2_frame, h_frame, r_frame, cpl_frame, in_frame, w3_def, w4_def, so2_val;
  certify::Sup c4_lip, c5_ff, c5_ft, c6, c7, c8a, c8b, c9, c10, d2_hi, xi2r, stress_xi;
  certify::Sup a_coupl, a_korn, a_tc, a_tc2, a_in, a_taylor, a_xi1, a_xi2, a_xi3, trunc_chain;
  certify::Inf cV_inf, d2_lo, h3_lo, h1_mid;
  certify::Sup cV_sup, h3_hi, hgrad, k_spd;
  double c3_max = 0.0;

  for (int n = 0; n < N; ++n) {
    const Mat2 F = smp.deformation();
    const Mat2 Fd = smp.rate();
    const Mat2 Q = smp.rotation();
    const double th = smp.temperature();
    const double eps = smp.eps();
    const auto wit = [&] { return describe(F, th, eps); };
    const double nF = norm(F);
    const double one_F = 1.0 + nF;

    const MatFunction g = bump_energy(mat, F);
    g_sup.update(std::fabs(g.v), wit);
    g2_sup.update(norm(g.dd), wit);

    // Frame indifference.
    {
      const double W = elastic_energy(mat, F);
      w2_frame.update(std::fabs(elastic_energy(mat, Q * F) - W) / (1.0 + std::fabs(W)), wit);
      const double Wc = coupling_energy(mat, F, th, eps);
      cpl_frame.update(std::fabs(coupling_energy(mat, Q * F, th, eps) - Wc) / (1.0 + std::fabs(Wc)), wit);
      const double Wi = internal_energy(mat, F, th, eps);
      in_frame.update(std::fabs(internal_energy(mat, Q * F, th, eps) - Wi) / (1.0 + std::fabs(Wi)), wit);
      const Gradient3 G = smp.second_gradient();
      const double H = hyper_energy(mat, G);
      h_frame.update(std::fabs(hyper_energy(mat, Q * G) - H) / (1.0 + H), wit);
      const double Rv = dissipation(mat, F, Fd, th).R;
      r_frame.update(std::fabs(dissipation(mat, Q * F, Q * Fd, th).R - Rv) / (1.0 + Rv), wit);

      // Midpoint convexity and growth.
      const Gradient3 G2 = smp.second_gradient();
      const double mid = hyper_energy(mat, 0.5 * G + 0.5 * G2);
      h1_mid.update(0.5 * (H + hyper_energy(mat, G2)) - mid + 1e-14 * (1.0 + H), wit);
      const double nG = norm(G);
      const double gp = std::pow(nG, mat.p);
      h3_lo.update(ratio(H, gp), wit);
      h3_hi.update(ratio(H, 1.0 + gp), wit);
      hgrad.update(ratio(norm(hyper_gradient(mat, G)), std::pow(nG, mat.p - 1)), wit);
    }

    // Lower bound with the certified constants.
    {
      const double W = elastic_energy(mat, F);
      const double lb = K.c0_lower * (nF * nF + std::pow(det(F), -mat.q)) - K.C0_lower;
      w3_def.update(lb - W, wit);
    }
    // Distance to SO(2) at theta_c; c0 = 1.
    {
      const double W = free_energy(mat, F, th_c, eps);
      const double d = dist_to_SO2(F);
      w4_def.update(d * d - W - 1e-12 * (1.0 + W), wit);
      so2_val.update(std::fabs(free_energy(mat, Q, th_c, eps)), wit);
    }

    c3_max = std::max(c3_max, std::fabs(coupling_energy(mat, F, 0.0, eps)));

    // Lipschitz in F.
    {
      const Mat2 F2 = smp.deformation();
      const double num = std::fabs(coupling_energy(mat, F, th, eps) - coupling_energy(mat, F2, th, eps));
      c4_lip.update(ratio(num, (1.0 + nF + norm(F2)) * norm(F - F2)), wit);
    }

    const Profile m = coupling_weight(mat, th, eps);
    const double tv = std::max(th, 1.0);
    const Mat2 dFcpl = m.v * g.d;
    const Mat2 dFth = m.d1 * g.d;
    const Mat2 dFthth = m.d2 * g.d;
    const HeatCapacity cv = heat_capacity_derivatives(mat, F, th, eps);
    const Mat2 dFin = internal_energy_dF(mat, F, th, eps);

    c5_ff.update(norm(m.v * g.dd), wit);
    c5_ft.update(ratio(norm(dFth) * tv, one_F), wit);
    cV_inf.update(cv.cV, wit);
    cV_sup.update(cv.cV, wit);
    c6.update(ratio(norm(dFthth), one_F), wit);
    c9.update(ratio(norm(dFthth) * tv * tv, one_F), wit);
    c7.update(ratio(std::fabs(cv.dtheta), one_F), wit);
    // Vanishing at theta_c.
    {
      const Profile mc = coupling_weight(mat, th_c, eps);
      const double scale = std::min(std::pow(eps, mat.alpha - 1.0), 1.0 / mat.Lambda);
      c8a.update(ratio(norm(mc.d1 * g.d), one_F * scale), wit);
      c8b.update(ratio(norm(mc.d1 * g.dd), std::pow(eps, mat.alpha - 1.0)), wit);
    }
    c10.update(ratio(std::fabs(cv.dtheta), cv.cV / (2.0 * th_c)), wit);

    {
      const Dissipation d = dissipation(mat, F, Fd, th);
      xi2r.update(std::fabs(d.xi - 2.0 * d.R) / std::max(1.0, d.xi), wit);
      stress_xi.update(std::fabs(ddot(d.stress, Fd) - d.xi) / std::max(1.0, d.xi), wit);
      const Mat2 FtFd = transpose(F) * Fd;
      const Mat2 Cd = FtFd + transpose(FtFd);
      const double cc = ddot(Cd, Cd);
      if (cc > 0.0) {
        d2_lo.update(2.0 * d.R / cc, wit);
        d2_hi.update(2.0 * d.R / cc, wit);
      }
      const Mat2 K = conductivity(mat, F, th);
      const double tr = trace(K), dt = det(K);
      const double lam_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * dt)));
      k_spd.update(-lam_min + std::fabs(K(0, 1) - K(1, 0)), wit);
    }

    // Auxiliary estimates.
    {
      const double xi = dissipation(mat, F, Fd, th).xi;
      const double sq = std::sqrt(xi);
      const double thm = std::min(th, 1.0);
      const double nFi = norm(inverse(F));
      const double dth = std::min(std::fabs(th - th_c), 1.0);
      const Profile mc = coupling_weight(mat, th_c, eps);
      const Mat2 dFcpl_c = mc.v * g.d;
      const Mat2 dFth_c = mc.d1 * g.d;
      const Mat2 dFin_c = internal_energy_dF(mat, F, th_c, eps);
      a_coupl.update(ratio(norm(dFcpl) + norm(dFin), thm * one_F), wit);
      a_korn.update(ratio(std::fabs(ddot(dFcpl, Fd)) + std::fabs(ddot(dFin, Fd)), thm * nFi * one_F * sq), wit);
      a_tc.update(ratio(norm(th * dFth - th_c * dFth_c), one_F * dth), wit);
      a_tc2.update(ratio(norm(dFcpl - dFcpl_c), one_F * dth), wit);
      a_in.update(ratio(norm(dFin - dFin_c), one_F * dth), wit);
      const double lin = std::min(th - th_c, 1.0);
      const double dth2 = std::min((th - th_c) * (th - th_c), 1.0);
      a_taylor.update(ratio(norm(dFcpl - dFcpl_c - lin * dFth_c), one_F * dth2), wit);
      a_xi1.update(ratio(std::fabs(th * ddot(dFth, Fd)), nFi * one_F * (th_c * norm(dFth_c) + dth) * sq), wit);
      a_xi2.update(ratio(std::fabs(ddot(dFcpl - dFcpl_c, Fd)), nFi * one_F * dth * sq), wit);
      a_xi3.update(ratio(std::fabs(ddot(dFin - dFin_c, Fd)), nFi * one_F * dth * sq), wit);

      // Truncation chain xi_reg <= xi_alpha <= xi.
      const double x = xi * smp.uniform(0.0, 1e3);
      const double xa = truncate_xi(x, mat.alpha, mat.Lambda);
      const double xr = regularize_xi(xa, mat.alpha, 0.01);
      const double xr2 = regularize_xi(xa, mat.alpha, 0.005);
      trunc_chain.update(std::max({xr - xa, xa - x, xr - xr2}) / std::max(1.0, x), wit);
    }
  }

  K.C5 = g2_sup.value;
  K.cV_min = cV_inf.value;
  K.cV_max = cV_sup.value;
  if (out_constants) *out_constants = K;

  rep.add(Check::make("coupling.sup_abs_g", g_sup.value, R::LE, C4, g_sup.witness));
  rep.add(Check::make("coupling.sup_abs_d2g", g2_sup.value, R::LE, cap, g2_sup.witness));
  rep.add(Check::make("elastic.frame_indifference", w2_frame.value, R::LE, opt.frame_tol, w2_frame.witness));
  rep.add(Check::make("elastic.lower_bound_deficit", w3_def.value, R::LE, 0.0, w3_def.witness));
  rep.add(Check::make("elastic.dist_SO2_deficit", w4_def.value, R::LE, 0.0, w4_def.witness));
  rep.add(Check::make("elastic.zero_on_SO2", so2_val.value, R::LE, 1e-12, so2_val.witness));
  rep.add(Check::make("hyper.midpoint_convexity", h1_mid.value, R::GE, 0.0, h1_mid.witness));
  rep.add(Check::make("hyper.frame_indifference", h_frame.value, R::LE, opt.frame_tol, h_frame.witness));
  rep.add(Check::make("hyper.lower_c0", h3_lo.value, R::GT, 0.0, h3_lo.witness));
  rep.add(Check::make("hyper.upper_C0", h3_hi.value, R::LE, cap, h3_hi.witness));
  rep.add(Check::make("hyper.gradient_growth", hgrad.value, R::LE, cap, hgrad.witness));
  rep.add(Check::make("hyper.zero_at_0", hyper_energy(mat, Gradient3{}), R::LE, 0.0));
  rep.add(Check::make("coupling.frame_indifference_Wcpl", cpl_frame.value, R::LE, opt.frame_tol, cpl_frame.witness));
  rep.add(Check::make("coupling.frame_indifference_Win", in_frame.value, R::LE, opt.frame_tol, in_frame.witness));
  rep.add(Check::make("coupling.zero_temperature", c3_max, R::LE, 0.0));
  rep.add(Check::make("coupling.lipschitz", c4_lip.value, R::LE, cap, c4_lip.witness));
  rep.add(Check::make("coupling.dFF_Wcpl", c5_ff.value, R::LE, cap, c5_ff.witness));
  rep.add(Check::make("coupling.dFtheta_Wcpl", c5_ft.value, R::LE, cap, c5_ft.witness));
  rep.add(Check::make("coupling.cV_min", cV_inf.value, R::GE, cV_lo, cV_inf.witness));
  rep.add(Check::make("coupling.cV_max", cV_sup.value, R::LE, cV_hi, cV_sup.witness));
  rep.add(Check::make("coupling.dFthetatheta_Wcpl", c6.value, R::LE, cap, c6.witness));
  rep.add(Check::make("coupling.dthetatheta_Win", c7.value, R::LE, cap, c7.witness));
  rep.add(Check::make("coupling.dFtheta_at_theta_c", c8a.value, R::LE, cap, c8a.witness));
  rep.add(Check::make("coupling.dFFtheta_at_theta_c", c8b.value, R::LE, cap, c8b.witness));
  rep.add(Check::make("coupling.dFthetatheta_decay", c9.value, R::LE, cap, c9.witness));
  rep.add(Check::make("coupling.entropy_ratio", c10.value, R::LE, 1.0, c10.witness));
  rep.add(Check::make("dissipation.xi_equals_2R", xi2r.value, R::LE, 1e-14, xi2r.witness));
  rep.add(Check::make("dissipation.stress_rate_equals_xi", stress_xi.value, R::LE, 1e-12, stress_xi.witness));
  rep.add(Check::make("dissipation.frame_indifference_R", r_frame.value, R::LE, opt.frame_tol, r_frame.witness));
  rep.add(Check::make("dissipation.lower_c0", d2_lo.value, R::GE, 1.0 - 1e-12, d2_lo.witness));
  rep.add(Check::make("dissipation.upper_C0", d2_hi.value, R::LE, 1.0 + mat.eta_D + 1e-12, d2_hi.witness));
  rep.add(Check::make("K.pullback_spd", k_spd.value, R::LT, 0.0, k_spd.witness));
  rep.add(Check::make("aux.coupling_growth", a_coupl.value, R::LE, cap, a_coupl.witness));
  rep.add(Check::make("aux.rate_without_korn", a_korn.value, R::LE, cap, a_korn.witness));
  rep.add(Check::make("aux.adiabatic_near_theta_c", a_tc.value, R::LE, cap, a_tc.witness));
  rep.add(Check::make("aux.stress_near_theta_c", a_tc2.value, R::LE, cap, a_tc2.witness));
  rep.add(Check::make("aux.internal_near_theta_c", a_in.value, R::LE, cap, a_in.witness));
  rep.add(Check::make("aux.taylor_at_theta_c", a_taylor.value, R::LE, cap, a_taylor.witness));
  rep.add(Check::make("aux.adiabatic_rate_xi", a_xi1.value, R::LE, cap, a_xi1.witness));
  rep.add(Check::make("aux.stress_rate_xi", a_xi2.value, R::LE, cap, a_xi2.witness));
  rep.add(Check::make("aux.internal_rate_xi", a_xi3.value, R::LE, cap, a_xi3.witness));
  rep.add(Check::make("xi.truncation_chain", trunc_chain.value, R::LE, 0.0, trunc_chain.witness));
  return rep;
}

/// Finite-difference verification of every analytic derivative. Points are
/// kept away from det = 0 and theta = 0.
inline Report derivative_suite(const Material& mat, const CertificationOptions& opt = {}, int points = 100) {
  using certify::fd_gradient;
  using certify::fd_hessian;
  using certify::rel_err;
  using R = Check::Rel;
  Report rep;
  rep.title = "derivative consistency";
  certify::Sampler smp(opt.seed + 1);
  const double h = opt.fd_step;
  certify::Sup e_dF, e_dFF, e_dth, e_dthth, e_dFth, e_dFthth, e_cV, e_cVth, e_cVF, e_inF, e_H, e_R;
  for (int n = 0; n < points; ++n) {
    const Mat2 F = smp.deformation(0.3, 3.0);
    const double th = smp.temperature(0.1, 10.0);
    const double eps = smp.eps();
    const Mat2 Fd = smp.rate();
    const auto wit = [&] { return certify::describe(F, th, eps); };
    const StressDerivatives sd = stress_derivatives(mat, F, th, eps);
    const auto W = [&](const Mat2& X) { return free_energy(mat, X, th, eps); };
    const auto dW = [&](const Mat2& X) { return stress_derivatives(mat, X, th, eps).dF_W; };
    e_dF.update(rel_err(sd.dF_W, fd_gradient(W, F, h)), wit);
    e_dFF.update(rel_err(sd.dFF_W, fd_hessian(dW, F, h)), wit);
    const auto Wt = [&](double t) { return free_energy(mat, F, t, eps); };
    e_dth.update(rel_err(sd.dtheta_W, (Wt(th + h) - Wt(th - h)) / (2 * h)), wit);
    const auto Wtt = [&](double t) { return stress_derivatives(mat, F, t, eps).dtheta_W; };
    e_dthth.update(rel_err(sd.dthetatheta_W, (Wtt(th + h) - Wtt(th - h)) / (2 * h)), wit);
    const auto dWt = [&](double t) { return stress_derivatives(mat, F, t, eps).dF_W; };
    e_dFth.update(rel_err(sd.dFtheta_W, (dWt(th + h) - dWt(th - h)) / (2 * h)), wit);
    const auto dWtt = [&](double t) { return stress_derivatives(mat, F, t, eps).dFtheta_W; };
    e_dFthth.update(rel_err(sd.dFthetatheta_W, (dWtt(th + h) - dWtt(th - h)) / (2 * h)), wit);

    const HeatCapacity cv = heat_capacity_derivatives(mat, F, th, eps);
    const auto Win = [&](double t) { return internal_energy(mat, F, t, eps); };
    e_cV.update(rel_err(cv.cV, (Win(th + h) - Win(th - h)) / (2 * h)), wit);
    const auto cVt = [&](double t) { return heat_capacity(mat, F, t, eps); };
    e_cVth.update(rel_err(cv.dtheta, (cVt(th + h) - cVt(th - h)) / (2 * h)), wit);
    const auto cVF = [&](const Mat2& X) { return heat_capacity(mat, X, th, eps); };
    e_cVF.update(rel_err(cv.dF, fd_gradient(cVF, F, h)), wit);
    const auto WinF = [&](const Mat2& X) { return internal_energy(mat, X, th, eps); };
    e_inF.update(rel_err(internal_energy_dF(mat, F, th, eps), fd_gradient(WinF, F, h)), wit);

    const Gradient3 G = smp.second_gradient();
    const Gradient3 dH = hyper_gradient(mat, G);
    double eH = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int p = 0; p < 4; ++p) {
        Gradient3 Gp = G, Gm = G;
        Gp.slice[k].a[p] += h;
        Gm.slice[k].a[p] -= h;
        const double fd = (hyper_energy(mat, Gp) - hyper_energy(mat, Gm)) / (2 * h);
        eH = std::max(eH, std::fabs(dH.slice[k].a[p] - fd) / std::max(1.0, norm(dH)));
      }
    e_H.update(eH, wit);

    const auto Rf = [&](const Mat2& X) { return dissipation(mat, F, X, th).R; };
    e_R.update(rel_err(dissipation(mat, F, Fd, th).stress, fd_gradient(Rf, Fd, h)), wit);
  }
  const double tol = opt.fd_tol;
  rep.add(Check::make("fd.dF_W", e_dF.value, R::LE, tol, e_dF.witness));
  rep.add(Check::make("fd.dFF_W", e_dFF.value, R::LE, tol, e_dFF.witness));
  rep.add(Check::make("fd.dtheta_W", e_dth.value, R::LE, tol, e_dth.witness));
  rep.add(Check::make("fd.dthetatheta_W", e_dthth.value, R::LE, tol, e_dthth.witness));
  rep.add(Check::make("fd.dFtheta_W", e_dFth.value, R::LE, tol, e_dFth.witness));
  rep.add(Check::make("fd.dFthetatheta_W", e_dFthth.value, R::LE, tol, e_dFthth.witness));
  rep.add(Check::make("fd.heat_capacity", e_cV.value, R::LE, tol, e_cV.witness));
  rep.add(Check::make("fd.dtheta_cV", e_cVth.value, R::LE, tol, e_cVth.witness));
  rep.add(Check::make("fd.dF_cV", e_cVF.value, R::LE, tol, e_cVF.witness));
  rep.add(Check::make("fd.dF_Win", e_inF.value, R::LE, tol, e_inF.witness));
  rep.add(Check::make("fd.dG_H", e_H.value, R::LE, tol, e_H.witness));
  rep.add(Check::make("fd.dFdot_R", e_R.value, R::LE, tol, e_R.witness));
  return rep;
}

/// Roundtrips of the inverse temperature map and its w-derivative.
inline Report psi_suite(const Material& mat, const CertificationOptions& opt = {}, int points = 200) {
  using R = Check::Rel;
  Report rep;
  rep.title = "inverse temperature map";
  certify::Sampler smp(opt.seed + 2);
  certify::Sup rt_theta, rt_w, slope, mono;
  for (int n = 0; n < points; ++n) {
    const Mat2 F = smp.deformation();
    const double th = smp.temperature();
    const double eps = smp.eps();
    const auto wit = [&] { return certify::describe(F, th, eps); };
    const double w = internal_energy(mat, F, th, eps);
    const double th2 = psi_inverse(mat, F, w, eps);
    rt_theta.update(std::fabs(th2 - th) / std::max(1.0, th), wit);
    const double w2 = smp.uniform(0.0, 1e3);
    const double th3 = psi_inverse(mat, F, w2, eps);
    rt_w.update(std::fabs(internal_energy(mat, F, th3, eps) - w2) / std::max(1.0, w2), wit);
    const double dw = 1e-4 * std::max(1.0, w);
    const double fd = (psi_inverse(mat, F, w + dw, eps) - psi_inverse(mat, F, std::max(0.0, w - dw), eps)) /
                      (w + dw - std::max(0.0, w - dw));
    slope.update(std::fabs(fd * heat_capacity(mat, F, th, eps) - 1.0), wit);
  }
  {
    const Mat2 F = smp.deformation();
    double prev = -1.0, worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
      const double w = internal_energy(mat, F, 3.0 * mat.theta_c * i / 2000, 1.0);
      if (i > 0) worst = std::max(worst, prev - w);
      prev = w;
    }
    mono.value = worst;
  }
  rep.add(Check::make("psi.roundtrip_theta", rt_theta.value, R::LE, opt.roundtrip_tol, rt_theta.witness));
  rep.add(Check::make("psi.roundtrip_w", rt_w.value, R::LE, 1e-12, rt_w.witness));
  rep.add(Check::make("psi.slope_times_cV", slope.value, R::LE, 1e-6, slope.witness));
  rep.add(Check::make("Win.monotone_in_theta", mono.value, R::LT, 0.0));
  rep.add(Check::make("psi.zero", psi_inverse(mat, Mat2::identity(), 0.0, 1.0), R::LE, 0.0));
  return rep;
}

/// Relative roundoff slack for the smooth positive-part inequalities; several
/// of them are equalities in the limit s -> 0.
inline constexpr double phi_beta_slack = 1e-14;

/// Inequalities and monotone families of phi_beta on an (s, beta) grid.
inline Report phi_beta_suite(int ns = 40, int nbeta = 25) {
  using R = Check::Rel;
  Report rep;
  rep.title = "phi_beta";
  int v1 = 0, v2 = 0, v3 = 0, v4 = 0, points = 0;
  std::string w1, w2, w3, w4;
  const double sl = phi_beta_slack;
  for (int i = 0; i < ns; ++i) {
    const double s = -2.0 + 4.0 * (i + 0.5) / ns;
    for (int j = 0; j < nbeta; ++j) {
      const double beta = std::pow(2.0, 1.0 - 12.0 * j / (nbeta - 1));
      const Profile p = phi_beta(s, beta);
      const auto wit = [&] { return "s=" + fmt_short(s) + " beta=" + fmt_short(beta); };
      ++points;
      const double sp = std::max(s, 0.0);
      if (p.v > p.d1 * s + sl * p.v) ++v1, w1 = wit();
      if (p.d1 * s > 4.0 * p.v + sl * p.d1 * sp) ++v2, w2 = wit();
      if (p.d2 * s > 3.0 * p.d1 + sl * p.d1) ++v3, w3 = wit();
      if (p.v > sp + sl * sp) ++v4, w4 = wit();
    }
  }
  rep.note("phi_beta.grid_points", static_cast<double>(points));
  rep.add(Check::make("phi_beta.phi_le_dphi_s", v1, R::LE, 0, w1));
  rep.add(Check::make("phi_beta.dphi_s_le_4phi", v2, R::LE, 0, w2));
  rep.add(Check::make("phi_beta.d2phi_s_le_3dphi", v3, R::LE, 0, w3));
  rep.add(Check::make("phi_beta.phi_le_pos_part", v4, R::LE, 0, w4));

  // Monotone families as beta decreases, and their limits.
  int mono_v = 0, mono_d = 0;
  double lim_v = 0.0, lim_d = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = -2.0 + 4.0 * i / 400;
    double pv = -1.0, pd = -1.0;
    for (int k = 0; k <= 10; ++k) {
      const double beta = std::ldexp(1.0, -k);
      const Profile p = phi_beta(s, beta);
      if (p.v < pv - sl * std::fabs(pv)) ++mono_v;
      if (p.d1 < pd - sl * std::fabs(pd)) ++mono_d;
      pv = p.v;
      pd = p.d1;
    }
    lim_v = std::max(lim_v, std::fabs(pv - std::max(s, 0.0)));
    if (std::fabs(s) >= 0.1) lim_d = std::max(lim_d, std::fabs(pd - (s > 0.0 ? 1.0 : 0.0)));
  }
  rep.add(Check::make("phi_beta.monotone_in_beta", mono_v, R::LE, 0));
  rep.add(Check::make("phi_beta.derivative_monotone_in_beta", mono_d, R::LE, 0));
  rep.add(Check::make("phi_beta.limit_pos_part", lim_v, R::LE, std::ldexp(1.0, -10)));
  rep.add(Check::make("phi_beta.limit_indicator", lim_d, R::LE, 1e-6));
  return rep;
}

}  // namespace thermovisc
