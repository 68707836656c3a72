#include <gtest/gtest.h>

#include "thermovisc/diagnostics.hpp"
#include "thermovisc/nonlinear_sim.hpp"

using namespace thermovisc;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.nx = c.ny = 8;
  c.dt = 0.02;
  c.T = 0.1;
  c.eps = 0.2;
  return c;
}

}  // namespace

TEST(NonlinearSim, ZeroDataKeepsEquilibrium) {
  Material m;
  const NonlinearSimulator sim(small_config(), m);
  const Trajectory tr = sim.run();
  ASSERT_EQ(tr.states.size(), 6u);
  const Vector id = sim.grid().identity_field();
  for (const State& s : tr.states) {
    EXPECT_LE((s.y - id).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LE((s.theta.array() - m.theta_c).abs().maxCoeff(), 1e-10);
  }
}

TEST(NonlinearSim, InsulatedUncoupledHeatContentIsConserved) {
  Material m;
  m.kappa = 0.0;
  m.bump_amplitude = 0.0;
  SimConfig c = small_config();
  c.mu0_amp = 1.0;
  const NonlinearSimulator sim(c, m);
  const Trajectory tr = sim.run();
  const Vector lumped = lumped_integral(sim.grid(), [](int) { return 1.0; });
  const double h0 = lumped.dot(tr.states.front().theta);
  for (const State& s : tr.states) {
    EXPECT_NEAR(lumped.dot(s.theta), h0, 1e-9);
    EXPECT_LE((s.y - sim.grid().identity_field()).lpNorm<Eigen::Infinity>(), 1e-10);
  }
  EXPECT_LT(tr.states.back().theta.maxCoeff(), tr.states.front().theta.maxCoeff());
}

TEST(NonlinearSim, LoadedRunSatisfiesEnergyAccounting) {
  Material m;
  m.beta0 = 1.0;
  SimConfig c = small_config();
  c.u0_amp = 1.0;
  c.mu0_amp = 1.0;
  c.loads.f_y.values = {-1.0};
  c.loads.g_x.values = {0.5};
  const NonlinearSimulator sim(c, m);
  const Trajectory tr = sim.run();
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    const StepRecord& r = tr.records[k];
    EXPECT_LE(r.descent_slack, 1e-10 * (1.0 + std::fabs(r.phi_before)));
    EXPECT_LE(std::fabs(r.energy_residual), r.energy_bound);
    EXPECT_GT(r.theta_min, 0.0);
    EXPECT_EQ(r.heat_positive_offdiag, 0);
  }
  const Report rep = energy_report(tr, sim);
  EXPECT_TRUE(rep.all_pass()) << rep.to_text();
  EXPECT_GT(tr.records.back().diss_cum, 0.0);
}

TEST(NonlinearSim, IncrementalEnergyGradientMatchesFiniteDifferences) {
  Material m;
  m.beta0 = 1.0;
  SimConfig c = small_config();
  c.u0_amp = 1.0;
  const NonlinearSimulator sim(c, m);
  const State s0 = sim.initial_state();
  const FrozenState fp = sim.freeze(s0);
  const Vector load = sim.load_vector(sim.tau());
  Vector y = s0.y;
  for (int i = 0; i < y.size(); ++i) y[i] += 1e-3 * std::sin(0.7 * i);
  Vector g;
  sim.incremental_energy(fp, load, y, &g);
  for (int d : {2 * 20 + 1, 2 * 40, 2 * 61 + 1}) {
    const double h = 1e-6;
    Vector yp = y, ym = y;
    yp[d] += h;
    ym[d] -= h;
    const double fd = (sim.incremental_energy(fp, load, yp, nullptr) - sim.incremental_energy(fp, load, ym, nullptr)) /
                      (2 * h);
    EXPECT_NEAR(g[d], fd, 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(NonlinearSim, InfeasibleInitialDeformationIsRejected) {
  Material m;
  SimConfig c = small_config();
  c.eps = 1.0;
  c.u0_amp = -40.0;
  const NonlinearSimulator sim(c, m);
  EXPECT_THROW(sim.initial_state(), ConfigError);
}

TEST(NonlinearSim, RunsAreDeterministic) {
  Material m;
  m.beta0 = 1.0;
  SimConfig c = small_config();
  c.u0_amp = 1.0;
  c.mu0_amp = 1.0;
  c.loads.f_y.values = {-1.0};
  const Trajectory a = NonlinearSimulator(c, m).run();
  const Trajectory b = NonlinearSimulator(c, m).run();
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    EXPECT_EQ((a.states[k].y - b.states[k].y).lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ((a.states[k].theta - b.states[k].theta).lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(NonlinearSim, LoadsAndBoundaryTemperatureUseStepMidpoints) {
  Material m;
  SimConfig c = small_config();
  c.flat_mode = FlatMode::Exponential;
  c.flat_rate = 2.0;
  const NonlinearSimulator sim(c, m);
  EXPECT_DOUBLE_EQ(sim.load_time(0.04), 0.03);
  EXPECT_NEAR(sim.boundary_temperature(0.04), std::exp(-2.0 * 0.03), 1e-15);
}
