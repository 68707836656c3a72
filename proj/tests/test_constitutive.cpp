#include <gtest/gtest.h>

#include <cmath>

#include "thermovisc/constitutive.hpp"

using namespace thermovisc;

TEST(Constitutive, ElasticEnergyOfUniaxialStretch) {
  Material m;
  const Mat2 F = Mat2::diag(2.0, 1.0);
  // |F^T F - I|^2 = 9, (1/2 - 1)^4 = 1/16, outside the bump support.
  EXPECT_NEAR(elastic_energy(m, F), 9.0625 - m.C1, 1e-13);
  EXPECT_NEAR(free_energy(m, F, m.theta_c, 0.1), 9.0625, 1e-13);
}

TEST(Constitutive, IdentityIsStressFreeAtCriticalTemperature) {
  Material m;
  m.beta0 = 1.0;
  const Mat2 I = Mat2::identity();
  EXPECT_NEAR(norm(free_energy_dF(m, I, m.theta_c, 0.5)), 0.0, 1e-14);
  EXPECT_NEAR(bump_energy(m, I).v, 0.0, 1e-15);
  EXPECT_NEAR(norm(bump_energy(m, I).d - 2.0 * m.bump_amplitude * I), 0.0, 1e-14);
}

TEST(Constitutive, FrameIndifference) {
  Material m;
  m.beta0 = 0.7;
  const Mat2 F{{1.1, 0.2, -0.1, 0.95}};
  const Mat2 Q = Mat2::rotation(0.83);
  for (double th : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(free_energy(m, Q * F, th, 0.2), free_energy(m, F, th, 0.2), 1e-12);
    EXPECT_NEAR(heat_capacity(m, Q * F, th, 0.2), heat_capacity(m, F, th, 0.2), 1e-12);
  }
  const Mat2 Fd{{0.3, -0.4, 0.1, 0.2}};
  EXPECT_NEAR(dissipation(m, Q * F, Q * Fd, 1.0).R, dissipation(m, F, Fd, 1.0).R, 1e-12);
}

TEST(Constitutive, RejectsInfeasibleArguments) {
  Material m;
  EXPECT_THROW(free_energy(m, Mat2::diag(1.0, -1.0), 1.0, 0.1), DomainError);
  EXPECT_THROW(coupling_energy(m, Mat2::identity(), -0.1, 0.1), DomainError);
}

TEST(Constitutive, StressMatchesFiniteDifferences) {
  Material m;
  m.beta0 = 1.0;
  const Mat2 F{{1.05, 0.1, -0.05, 0.98}};
  const double th = 1.3, eps = 0.25, h = 1e-6;
  const Mat2 S = free_energy_dF(m, F, th, eps);
  for (int p = 0; p < 4; ++p) {
    Mat2 Fp = F, Fm = F;
    Fp.a[p] += h;
    Fm.a[p] -= h;
    const double fd = (free_energy(m, Fp, th, eps) - free_energy(m, Fm, th, eps)) / (2 * h);
    EXPECT_NEAR(S.a[p], fd, 1e-6 * std::max(1.0, std::fabs(fd)));
  }
  const EnergyAndStress both = free_energy_with_dF(m, F, th, eps);
  EXPECT_NEAR(both.W, free_energy(m, F, th, eps), 1e-13);
  EXPECT_NEAR(norm(both.dF - S), 0.0, 1e-13);
}

TEST(Constitutive, HeatCapacityIsMinusThetaTimesSecondDerivative) {
  Material m;
  m.beta0 = 1.0;
  const Mat2 F{{1.2, 0.0, 0.1, 0.9}};
  const double th = 0.8, eps = 0.5, h = 1e-4;
  auto W = [&](double t) { return coupling_energy(m, F, t, eps); };
  const double d2 = (W(th + h) - 2 * W(th) + W(th - h)) / (h * h);
  EXPECT_NEAR(heat_capacity(m, F, th, eps), -th * d2, 1e-5);
}

TEST(Constitutive, DissipationRateIsTwiceThePotential) {
  Material m;
  const Mat2 F{{1.1, 0.3, -0.2, 1.0}}, Fd{{0.5, -0.1, 0.7, 0.2}};
  const Dissipation d = dissipation(m, F, Fd, 0.4);
  EXPECT_NEAR(d.xi, 2.0 * d.R, 1e-14);
  EXPECT_NEAR(ddot(d.stress, Fd), d.xi, 1e-12);
  EXPECT_DOUBLE_EQ(dissipation(m, F, Mat2::zero(), 0.4).R, 0.0);
}

TEST(Constitutive, ConductivityPullBack) {
  Material m;
  const Mat2 K = conductivity(m, Mat2::diag(2.0, 1.0), 0.0);
  EXPECT_NEAR(K(0, 0), 0.5 * m.kappa0, 1e-15);
  EXPECT_NEAR(K(1, 1), 2.0 * m.kappa0, 1e-15);
  EXPECT_DOUBLE_EQ(K(0, 1), 0.0);
}

TEST(Constitutive, DissipationTruncations) {
  EXPECT_DOUBLE_EQ(truncate_xi(4.0, 1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(truncate_xi(0.5, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(truncate_xi(100.0, 2.0, 1.0), 100.0);
  EXPECT_NEAR(regularize_xi(1e4, 2.0, 0.01), 1000.0, 1e-9);
  EXPECT_DOUBLE_EQ(regularize_xi(50.0, 2.0, 0.01), 50.0);
}

TEST(Constitutive, SmoothPositivePart) {
  EXPECT_NEAR(phi_beta(1.0, 1.0).v, std::pow(2.0, 0.25) - 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(phi_beta(-0.3, 1.0).v, 0.0);
  EXPECT_DOUBLE_EQ(phi_beta(0.0, 0.5).d1, 0.0);
  EXPECT_NEAR(phi_beta(1e3, 1e-3).v, 1e3 - 1e-3, 1e-9);
}

TEST(Constitutive, InverseTemperatureRoundtrip) {
  Material m;
  m.beta0 = 1.0;
  const Mat2 F{{1.1, 0.05, 0.0, 0.97}};
  for (double th : {1e-3, 0.2, 1.0, 4.0}) {
    const double w = internal_energy(m, F, th, 0.3);
    EXPECT_NEAR(psi_inverse(m, F, w, 0.3), th, 1e-10 * std::max(1.0, th));
  }
}

TEST(Constitutive, LinearizedTensorsSwitchWithAlpha) {
  Material m;
  m.beta0 = 2.0;
  const LinearizedTensors t1 = linearized_tensors(m, 1.0);
  EXPECT_NEAR(norm(t1.Bhat - 2.0 * 2.0 * m.bump_amplitude * Mat2::identity()), 0.0, 1e-14);
  EXPECT_NEAR(norm(t1.B_alpha - t1.Bhat), 0.0, 0.0);
  EXPECT_DOUBLE_EQ(norm(t1.CD_alpha), 0.0);
  const LinearizedTensors t2 = linearized_tensors(m, 2.0);
  EXPECT_DOUBLE_EQ(norm(t2.B_alpha), 0.0);
  EXPECT_GT(norm(t2.CD_alpha), 0.0);
  const LinearizedTensors t15 = linearized_tensors(m, 1.5);
  EXPECT_DOUBLE_EQ(norm(t15.B_alpha) + norm(t15.CD_alpha), 0.0);
  EXPECT_THROW(linearized_tensors(m, 2.5), DomainError);
}
