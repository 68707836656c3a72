#include <gtest/gtest.h>

#include "thermovisc/tensor.hpp"

using namespace thermovisc;

TEST(Tensor, DeterminantTraceAndInverse) {
  const Mat2 F{{2.0, 1.0, 0.5, 3.0}};
  EXPECT_DOUBLE_EQ(det(F), 5.5);
  EXPECT_DOUBLE_EQ(trace(F), 5.0);
  const Mat2 P = F * inverse(F);
  EXPECT_NEAR(norm(P - Mat2::identity()), 0.0, 1e-15);
}

TEST(Tensor, CofactorIsDerivativeOfDeterminant) {
  const Mat2 F{{1.3, -0.2, 0.4, 0.9}};
  const Mat2 cof = cofactor(F);
  const double h = 1e-7;
  for (int p = 0; p < 4; ++p) {
    Mat2 Fp = F, Fm = F;
    Fp.a[p] += h;
    Fm.a[p] -= h;
    EXPECT_NEAR((det(Fp) - det(Fm)) / (2 * h), cof.a[p], 1e-8);
  }
}

TEST(Tensor, SymmetricIdentityProjects) {
  const Mat2 A{{1.0, 2.0, -4.0, 3.0}};
  const Mat2 S = Tensor4::identity_sym() * A;
  EXPECT_NEAR(norm(S - sym(A)), 0.0, 1e-15);
  EXPECT_NEAR(norm(Tensor4::identity() * A - A), 0.0, 1e-15);
}

TEST(Tensor, RotationsHaveZeroDistanceToSO2) {
  for (double ang : {0.0, 0.3, 1.7, -2.9}) EXPECT_NEAR(dist_to_SO2(Mat2::rotation(ang)), 0.0, 1e-14);
  EXPECT_NEAR(dist_to_SO2(Mat2::diag(2.0, 1.0)), 1.0, 1e-14);
}

TEST(Tensor, OuterProductContraction) {
  const Mat2 A{{1.0, 2.0, 3.0, 4.0}}, B{{0.5, -1.0, 2.0, 0.0}};
  const Tensor4 T = Tensor4::outer(A, B);
  EXPECT_DOUBLE_EQ(contract(A, T, B), ddot(A, A) * ddot(B, B));
}
