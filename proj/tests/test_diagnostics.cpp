#include <gtest/gtest.h>

#include <cmath>

#include "thermovisc/diagnostics.hpp"

using namespace thermovisc;

namespace {

SimConfig small(double eps) {
  SimConfig c;
  c.nx = c.ny = 8;
  c.dt = 0.02;
  c.T = 0.1;
  c.eps = eps;
  c.u0_amp = 1.0;
  c.mu0_amp = 1.0;
  c.loads.f_y.values = {-1.0};
  return c;
}

}  // namespace

TEST(Diagnostics, KornRatioDetectsInfinitesimalRotations) {
  const Grid2 g(6, 6);
  const std::vector<Mat2> I(g.num_qp(), Mat2::identity());
  const Vector rot = g.interpolate_vector([](const Vec2& x) { return Vec2{{-x[1], x[0]}}; });
  EXPECT_GT(korn_ratio(rot, I, g), 1e6);
  const Vector stretch = g.interpolate_vector([](const Vec2& x) { return Vec2{{x[0], 0.0}}; });
  EXPECT_NEAR(korn_ratio(stretch, I, g), 1.0, 1e-13);
  const double sampled = korn_ratio_sampled(I, g, 20, 7);
  EXPECT_TRUE(std::isfinite(sampled));
  EXPECT_GE(sampled, 1.0);
  EXPECT_EQ(sampled, korn_ratio_sampled(I, g, 20, 7));
}

TEST(Diagnostics, LinearizationErrorVanishesForZeroData) {
  Material m;
  SimConfig c;
  c.nx = c.ny = 8;
  c.dt = 0.02;
  c.T = 0.1;
  const NonlinearSimulator nl(c, m);
  SimConfig lc = c;
  lc.model = Model::Linear;
  const LinearSimulator lin(lc, m);
  const LinearizationError e = linearization_error(nl.run(), lin.run(), nl.grid(), m.theta_c, m.alpha);
  EXPECT_LE(e.u_H1_sup, 1e-9);
  EXPECT_LE(e.rate_L2, 1e-8);
  EXPECT_LE(e.mu_L2, 1e-9);
}

TEST(Diagnostics, LinearizationReportUsesReductionPerHalving) {
  std::vector<LinearizationError> errs{{0.2, 4.0, 4.0, 4.0}, {0.1, 2.0, 2.0, 3.5}, {0.025, 0.5, 0.5, 0.1}};
  const Report r = linearization_report(errs);
  EXPECT_NEAR(r.find("linearization.u_H1_sup.min_reduction")->value, 2.0, 1e-14);
  EXPECT_FALSE(r.find("linearization.mu_L2.min_reduction")->pass);
}

TEST(Diagnostics, ScalingReportRatios) {
  std::vector<ScalingQuantities> s(3);
  for (int i = 0; i < 3; ++i) {
    s[i].eps = 0.2 / (1 << i);
    s[i].energy = 1.0 + i;
    s[i].deformation = 1.0;
    s[i].temperature = 0.0;
    s[i].dissipation = 2.0;
    s[i].strain_rate = 1.0;
  }
  const Report r = apriori_scaling_report(s, 3.0);
  EXPECT_NEAR(r.find("scaling.energy_over_eps2.max_over_min")->value, 3.0, 1e-15);
  EXPECT_TRUE(r.all_pass());
  s[2].energy = 3.5;
  EXPECT_FALSE(apriori_scaling_report(s, 3.0).all_pass());
}

TEST(Diagnostics, EnergyReportPassesOnShortRun) {
  Material m;
  m.beta0 = 1.0;
  const NonlinearSimulator sim(small(0.2), m);
  const Trajectory tr = sim.run();
  const Report r = energy_report(tr, sim);
  EXPECT_TRUE(r.all_pass()) << r.to_text();
}

TEST(Diagnostics, PositivityOfCoolingRun) {
  Material m;
  m.alpha = 2.0;
  SimConfig c;
  c.nx = c.ny = 8;
  c.dt = 0.01;
  c.T = 0.2;
  c.eps = 1.0;
  c.flat_mode = FlatMode::Exponential;
  const NonlinearSimulator sim(c, m);
  const Trajectory tr = sim.run();
  const PositivityCertificate pc = positivity_certificate(tr, sim);
  EXPECT_TRUE(pc.report.all_pass()) << pc.report.to_text();
  EXPECT_GT(pc.C_hat, 0.0);
  for (double G : pc.series.G) EXPECT_EQ(G, 0.0);
  for (std::size_t k = 0; k < pc.series.t.size(); ++k)
    EXPECT_GE(pc.series.theta_min[k], pc.lambda0 * std::exp(-pc.C_hat * pc.series.t[k]) * (1 - 1e-14));
}

TEST(Diagnostics, SmoothPositivePartChainRule) {
  Material m;
  SimConfig c = small(0.5);
  c.flat_mode = FlatMode::Exponential;
  c.eps = 1.0;
  c.mu0_amp = 0.5;
  const NonlinearSimulator sim(c, m);
  const Trajectory tr = sim.run();
  auto lam = [](double t) { return 1.2 * std::exp(-t); };
  auto rate = [](double t) { return -1.2 * std::exp(-t); };
  const auto F = phi_beta_functional(tr, sim.grid(), 0.1, lam);
  const auto defect = phi_beta_chain_rule_defect(tr, sim.grid(), 0.1, lam, rate);
  ASSERT_EQ(F.size(), tr.states.size());
  ASSERT_EQ(defect.size(), tr.states.size() - 1);
  for (double v : F) EXPECT_GE(v, 0.0);
  for (double d : defect) EXPECT_TRUE(std::isfinite(d));
}
