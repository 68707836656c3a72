#include <gtest/gtest.h>

#include <cmath>

#include "thermovisc/linear_sim.hpp"

using namespace thermovisc;

namespace {

SimConfig linear_config(double alpha_beta0 = 1.0) {
  SimConfig c;
  c.model = Model::Linear;
  c.nx = c.ny = 8;
  c.dt = 0.02;
  c.T = 0.1;
  c.u0_amp = alpha_beta0;
  c.mu0_amp = 1.0;
  c.loads.f_y.values = {-1.0};
  c.loads.g_x.values = {0.5};
  return c;
}

}  // namespace

TEST(LinearSim, ZeroDataStaysAtRest) {
  Material m;
  SimConfig c;
  c.model = Model::Linear;
  c.nx = c.ny = 8;
  c.T = 0.1;
  c.dt = 0.02;
  const LinearTrajectory tr = LinearSimulator(c, m).run();
  for (const auto& s : tr.states) {
    EXPECT_EQ(s.u.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(s.mu.lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(LinearSim, CouplingModeSelection) {
  Material m;
  m.beta0 = 1.0;
  m.alpha = 1.0;
  EXPECT_EQ(LinearSimulator(linear_config(), m).coupling(), Coupling::Picard);
  m.alpha = 1.5;
  const LinearSimulator mid(linear_config(), m);
  EXPECT_EQ(mid.coupling(), Coupling::MechFirst);
  EXPECT_FALSE(mid.mechanics_sees_temperature());
  m.alpha = 2.0;
  EXPECT_FALSE(LinearSimulator(linear_config(), m).mechanics_sees_temperature());
}

TEST(LinearSim, EnergyIdentityHoldsPerStep) {
  for (double alpha : {1.0, 1.5, 2.0}) {
    Material m;
    m.beta0 = 1.0;
    m.alpha = alpha;
    const LinearTrajectory tr = LinearSimulator(linear_config(), m).run();
    for (std::size_t k = 1; k < tr.records.size(); ++k)
      EXPECT_LE(tr.records[k].identity_relative(), 1e-8) << "alpha " << alpha << " step " << k;
  }
}

TEST(LinearSim, DecoupledMechanicsIgnoresHeatSolver) {
  Material m;
  m.alpha = 1.5;
  m.beta0 = 0.0;
  const LinearSimulator sim(linear_config(), m);
  const LinearTrajectory full = sim.run();
  const LinearTrajectory mech = sim.run_mechanics_only();
  ASSERT_EQ(full.states.size(), mech.states.size());
  for (std::size_t k = 0; k < full.states.size(); ++k)
    EXPECT_EQ((full.states[k].u - mech.states[k].u).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(LinearSim, ManufacturedSolutionConvergesAtSecondOrder) {
  for (double alpha : {1.0, 2.0}) {
    Material m;
    m.beta0 = 1.0;
    m.alpha = alpha;
    const ManufacturedErrors a = manufactured_errors(8, 0.1, 0.05, m);
    const ManufacturedErrors b = manufactured_errors(16, 0.1, 0.05, m);
    EXPECT_GE(std::log2(a.u_l2 / b.u_l2), 1.8) << alpha;
    EXPECT_GE(std::log2(a.mu_l2 / b.mu_l2), 1.8) << alpha;
    EXPECT_LE(b.max_identity_relative, 1e-8);
  }
}

TEST(LinearSim, StaggeringOrdersAgreeWhenConverged) {
  Material m;
  m.beta0 = 1.0;
  m.alpha = 1.0;
  SimConfig c = linear_config();
  c.solver.picard_tol = 1e-13;
  c.solver.picard_max = 60;
  c.solver.lin_tol = 1e-13;
  c.coupling = Coupling::Picard;
  const LinearTrajectory p = LinearSimulator(c, m).run();
  c.coupling = Coupling::MechFirst;
  const LinearTrajectory f = LinearSimulator(c, m).run();
  const double du = (p.states.back().u - f.states.back().u).lpNorm<Eigen::Infinity>();
  EXPECT_GT(du, 0.0);
  EXPECT_LT(du, 0.05 * p.states.back().u.lpNorm<Eigen::Infinity>());
}
