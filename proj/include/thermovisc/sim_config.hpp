#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "material.hpp"
#include "tensor.hpp"

namespace thermovisc {

/// Piecewise-linear interpolation of user samples, held constant outside
/// the sampled range. An empty schedule is identically zero.
struct TimeSeries {
  std::vector<double> values;

  double at(const std::vector<double>& times, double t) const {
    if (values.empty()) return 0.0;
    if (values.size() == 1 || times.empty()) return values.front();
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double s = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - s) * values[k - 1] + s * values[k];
  }
};

/// Time-sampled, spatially uniform data: body force f, traction g on
/// {x = 1}, and the boundary temperature deviation mu_flat.
struct LoadSchedule {
  std::vector<double> times;
  TimeSeries f_x, f_y, g_x, g_y, mu_flat;

  Vec2 f(double t) const { return Vec2{{f_x.at(times, t), f_y.at(times, t)}}; }
  Vec2 g(double t) const { return Vec2{{g_x.at(times, t), g_y.at(times, t)}}; }
  double mu(double t) const { return mu_flat.at(times, t); }

  void check() const {
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1])) throw ConfigError("load_times must be strictly increasing");
    for (const TimeSeries* s : {&f_x, &f_y, &g_x, &g_y, &mu_flat})
      if (!s->values.empty() && s->values.size() != 1 && s->values.size() != times.size())
        throw ConfigError("load lists must have one entry or as many entries as load_times");
  }
};

enum class Model { Nonlinear, Linear };
enum class Coupling { Auto, MechFirst, HeatFirst, Picard };
enum class FlatMode { Schedule, Exponential };

inline const char* to_string(Model m) { return m == Model::Nonlinear ? "nonlinear" : "linear"; }
inline const char* to_string(Coupling c) {
  switch (c) {
    case Coupling::Auto: return "auto";
    case Coupling::MechFirst: return "mech-first";
    case Coupling::HeatFirst: return "heat-first";
    case Coupling::Picard: return "picard";
  }
  return "?";
}
inline const char* to_string(FlatMode f) { return f == FlatMode::Schedule ? "schedule" : "exp"; }

/// Optimizer and linear-solver controls.
struct SolverOptions {
  double mech_gtol = 1e-9;
  int mech_max_iter = 500;
  double det_floor = 1e-3;
  int lbfgs_memory = 8;
  double heat_tol = 1e-10;
  int heat_max_iter = 10000;
  double lin_tol = 1e-12;
  int picard_max = 10;
  double picard_tol = 1e-10;
};

struct SimConfig {
  int nx = 16, ny = 16;
  double dt = 1e-2;
  double T = 0.1;
  double eps = 0.1;
  double nu = 0.01;
  Model model = Model::Nonlinear;
  Coupling coupling = Coupling::Auto;  // linear model: Picard when both couplings are active, else mech-first
  bool scale_loads = true;  // f_eps = eps f, g_eps = eps g
  bool heat_enabled = true;

  // Initial data y0 = id + eps u0, theta0 = theta_c + eps^alpha mu0 with
  // u0 = u0_amp (x1 x2, -x1^2 / 2) and mu0 = mu0_amp cos(pi x1) cos(pi x2).
  double u0_amp = 0.0;
  double mu0_amp = 0.0;

  // Boundary temperature: schedule -> theta_c + eps^alpha mu_flat(t),
  // exp -> flat_amp exp(-flat_rate t) (absolute).
  FlatMode flat_mode = FlatMode::Schedule;
  double flat_amp = 1.0;
  double flat_rate = 1.0;

  LoadSchedule loads;
  SolverOptions solver;

  int dump_every = 0;
  std::uint64_t seed = 12345;
  int sample_budget = 10000;
  double scaling_threshold = 3.0;

  int num_steps() const { return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9))); }
  double step_size() const { return T / num_steps(); }

  double load_factor() const { return scale_loads ? eps : 1.0; }

  static Vec2 u0_shape(const Vec2& x) { return Vec2{{x[0] * x[1], -0.5 * x[0] * x[0]}}; }
  static double mu0_shape(const Vec2& x) { return std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]); }

  /// Absolute boundary temperature of the nonlinear model.
  double theta_flat(const Material& mat, double t) const {
    if (flat_mode == FlatMode::Exponential) return flat_amp * std::exp(-flat_rate * t);
    return mat.theta_c + std::pow(eps, mat.alpha) * loads.mu(t);
  }
  /// Boundary datum of the linear model.
  double mu_flat(const Material& mat, double t) const {
    if (flat_mode == FlatMode::Exponential) return flat_amp * std::exp(-flat_rate * t) - mat.theta_c;
    return loads.mu(t);
  }

  void check(const Material& mat) const {
    if (nx < 4 || ny < 4) throw ConfigError("nx and ny must be >= 4");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(T > 0.0)) throw ConfigError("T must be positive");
    if (dt > T * (1.0 + 1e-12)) throw ConfigError("dt must not exceed T");
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
    if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in (0, 1]");
    if (!(solver.mech_gtol > 0.0) || solver.mech_max_iter < 1) throw ConfigError("invalid mechanical solver controls");
    if (!(solver.det_floor > 0.0)) throw ConfigError("det_floor must be positive");
    if (solver.lbfgs_memory < 1) throw ConfigError("lbfgs_memory must be >= 1");
    if (!(solver.heat_tol > 0.0) || solver.heat_max_iter < 1) throw ConfigError("invalid heat solver controls");
    if (!(solver.lin_tol > 0.0)) throw ConfigError("lin_tol must be positive");
    if (flat_mode == FlatMode::Exponential && !(flat_amp > 0.0)) throw ConfigError("flat_amp must be positive");
    if (dump_every < 0) throw ConfigError("dump_every must be >= 0");
    if (sample_budget < 1000) throw ConfigError("sample_budget must be >= 1000");
    if (!(scaling_threshold >= 1.0)) throw ConfigError("scaling_threshold must be >= 1");
    loads.check();
    (void)mat;
  }
};

}  // namespace thermovisc
