#include <gtest/gtest.h>

#include "thermovisc/certification.hpp"

using namespace thermovisc;

TEST(Certification, DefaultMaterialPasses) {
  Material m;
  CertificationOptions opt;
  CertifiedConstants cc;
  const Report r = validate_material(m, opt, &cc);
  for (const Check* c : r.failures()) ADD_FAILURE() << c->name << " " << c->value;
  EXPECT_TRUE(r.all_pass());
}

TEST(Certification, DerivativeAndRoundtripSuites) {
  Material m;
  m.beta0 = 1.0;
  CertificationOptions opt;
  EXPECT_TRUE(derivative_suite(m, opt).all_pass());
  EXPECT_TRUE(psi_suite(m, opt).all_pass());
}

TEST(Certification, SmoothPositivePartGridHasNoViolations) {
  const Report r = phi_beta_suite();
  EXPECT_TRUE(r.all_pass());
  for (const auto& c : r.checks) {
    if (c.name.find("limit") == std::string::npos) {
      EXPECT_EQ(c.value, 0.0) << c.name;
    }
  }
}

TEST(Certification, DetectsNonpositiveHeatCapacity) {
  Material m;
  m.C1 = 1e-3;
  m.bump_amplitude = 5.0;
  m.beta0 = 5.0;
  CertificationOptions opt;
  opt.sample_budget = 2000;
  const Report r = validate_material(m, opt);
  EXPECT_FALSE(r.all_pass());
}

TEST(Certification, SamplingIsSeeded) {
  Material m;
  CertificationOptions a, b;
  a.sample_budget = b.sample_budget = 2000;
  EXPECT_EQ(validate_material(m, a).to_text(), validate_material(m, b).to_text());
}
