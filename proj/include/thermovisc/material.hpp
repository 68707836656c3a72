#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace thermovisc {

/// Parameters of the shape-memory free-energy family together with the
/// conductivity, viscosity and hypergradient coefficients. Immutable after
/// check(); every constitutive evaluation reads from here.
struct Material {
  double theta_c = 1.0;         // critical temperature, a(theta_c) = 1
  double C1 = 10.0;             // entropic coefficient of C1 theta (1 - log theta)
  int p = 4;                    // hypergradient exponent
  int q = 4;                    // determinant exponent
  double kappa = 1.0;           // boundary heat-transfer coefficient
  double bump_amplitude = 0.1;  // A in g(F)
  double bump_width = 1.0;      // sigma: cutoff is 1 on [0, sigma], 0 on [4 sigma, inf)
  double beta0 = 0.0;           // strength of the eps-scaled coupling family
  double alpha = 2.0;           // temperature scaling exponent, theta - theta_c ~ eps^alpha
  double Lambda = 10.0;         // dissipation truncation level
  double kappa0 = 1.0;          // conductivity scale
  double eta_K = 0.25;          // conductivity modulation
  double eta_D = 0.25;          // viscosity modulation
  double c_H = 1e-3;            // H(G) = c_H |G|^p

  static constexpr int dim = 2;

  /// Smallest admissible determinant exponent for the given p.
  double q_min() const { return static_cast<double>(p * dim) / static_cast<double>(p - dim); }

  /// Coefficient of the eps-scaled coupling h(theta) g(F).
  double coupling_scale(double eps) const {
    if (beta0 == 0.0) return 0.0;
    return std::pow(eps, alpha - 1.0) * beta0;
  }

  /// Throws ConfigError on the first violated structural invariant.
  void check() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(theta_c > 0.0)) fail("theta_c must be positive");
    if (!(C1 > 0.0)) fail("C1 must be positive");
    if (p < 2 * dim || p % 2 != 0)
      fail("p must be an even integer with p >= 2d = 4 (got " + std::to_string(p) + ")");
    if (q < q_min())
      fail("q must satisfy q >= p*d/(p-d) = " + std::to_string(q_min()) + " for the determinant growth bound (got " +
           std::to_string(q) + ")");
    if (q % 2 != 0) fail("q must be an even integer (got " + std::to_string(q) + ")");
    if (!(kappa >= 0.0)) fail("kappa must be nonnegative");
    if (!(bump_amplitude >= 0.0)) fail("bump_amplitude must be nonnegative");
    if (!(bump_width > 0.0)) fail("bump_width must be positive");
    if (!std::isfinite(beta0)) fail("beta0 must be finite");
    if (!(alpha >= 1.0 && alpha <= 2.0))
      fail("alpha must lie in [1, 2]: below 1 the limiting coupling tensor is infinite, above 2 the "
           "limiting viscous heating is infinite (got " + std::to_string(alpha) + ")");
    if (!(Lambda >= 1.0)) fail("Lambda must be >= 1");
    if (!(kappa0 > 0.0)) fail("kappa0 must be positive");
    if (!(eta_K >= 0.0 && eta_K < 0.5)) fail("eta_K must lie in [0, 1/2)");
    if (!(eta_D >= 0.0 && eta_D < 0.5)) fail("eta_D must lie in [0, 1/2)");
    if (!(c_H > 0.0)) fail("c_H must be positive");
  }
};

}  // namespace thermovisc
