#pragma once

// Structured Q1 discretization of the unit square. Nodes are numbered
// row-major, node = j (nx + 1) + i; vector fields interleave components,
// dof = 2 node + comp. Every cell carries a 2x2 Gauss rule, quadrature point
// q = 4 cell + (2 gj + gi).

#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "tensor.hpp"

namespace thermovisc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

class Grid2 {
 public:
  Grid2(int nx, int ny) : nx_(nx), ny_(ny), hx_(1.0 / nx), hy_(1.0 / ny) {
    if (nx < 4 || ny < 4) throw ConfigError("grid needs nx, ny >= 4");
    const double g = 0.5 / std::sqrt(3.0);
    const std::array<double, 2> xi{0.5 - g, 0.5 + g};
    for (int gj = 0; gj < 2; ++gj)
      for (int gi = 0; gi < 2; ++gi) {
        const int q = 2 * gj + gi;
        const double s = xi[gi], t = xi[gj];
        const std::array<double, 4> ns{(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
        const std::array<double, 4> ds{-(1 - t), (1 - t), -t, t};
        const std::array<double, 4> dt{-(1 - s), -s, (1 - s), s};
        for (int a = 0; a < 4; ++a) {
          shape_[q][a] = ns[a];
          dshape_[q][a] = Vec2{{ds[a] / hx_, dt[a] / hy_}};
        }
        ref_[q] = Vec2{{s, t}};
      }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
  int num_cells() const { return nx_ * ny_; }
  int num_qp() const { return 4 * num_cells(); }
  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  int node_i(int n) const { return n % (nx_ + 1); }
  int node_j(int n) const { return n / (nx_ + 1); }
  Vec2 position(int n) const { return Vec2{{node_i(n) * hx_, node_j(n) * hy_}}; }

  bool is_boundary(int n) const {
    const int i = node_i(n), j = node_j(n);
    return i == 0 || j == 0 || i == nx_ || j == ny_;
  }
  /// Gamma_D = {x = 0}; the rest of the boundary is Neumann.
  bool is_dirichlet(int n) const { return node_i(n) == 0; }

  /// Global node indices of a cell's corners in the order (0,0), (1,0), (0,1), (1,1).
  std::array<int, 4> cell_nodes(int c) const {
    const int i = c % nx_, j = c / nx_;
    return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
  }
  double qp_weight() const { return 0.25 * hx_ * hy_; }
  double shape(int q_local, int a) const { return shape_[q_local][a]; }
  const Vec2& dshape(int q_local, int a) const { return dshape_[q_local][a]; }
  Vec2 qp_position(int q) const {
    const int c = q / 4, ql = q % 4;
    const int i = c % nx_, j = c / nx_;
    return Vec2{{(i + ref_[ql][0]) * hx_, (j + ref_[ql][1]) * hy_}};
  }

  /// Nodal interpolant of a function of position.
  template <class Fn>
  Vector interpolate_scalar(Fn&& f) const {
    Vector v(num_nodes());
    for (int n = 0; n < num_nodes(); ++n) v[n] = f(position(n));
    return v;
  }
  template <class Fn>
  Vector interpolate_vector(Fn&& f) const {
    Vector v(2 * num_nodes());
    for (int n = 0; n < num_nodes(); ++n) {
      const Vec2 u = f(position(n));
      v[2 * n] = u[0];
      v[2 * n + 1] = u[1];
    }
    return v;
  }
  Vector identity_field() const {
    return interpolate_vector([](const Vec2& x) { return x; });
  }

  /// Boundary edges as node pairs with their length.
  struct Edge {
    int n0, n1;
    double length;
  };
  std::vector<Edge> boundary_edges() const {
    std::vector<Edge> e;
    for (int i = 0; i < nx_; ++i) {
      e.push_back({node(i, 0), node(i + 1, 0), hx_});
      e.push_back({node(i, ny_), node(i + 1, ny_), hx_});
    }
    for (int j = 0; j < ny_; ++j) {
      e.push_back({node(0, j), node(0, j + 1), hy_});
      e.push_back({node(nx_, j), node(nx_, j + 1), hy_});
    }
    return e;
  }
  /// Edges of the loaded Neumann part {x = 1}.
  std::vector<Edge> traction_edges() const {
    std::vector<Edge> e;
    for (int j = 0; j < ny_; ++j) e.push_back({node(nx_, j), node(nx_, j + 1), hy_});
    return e;
  }

  bool same_shape(const Grid2& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

 private:
  int nx_, ny_;
  double hx_, hy_;
  std::array<std::array<double, 4>, 4> shape_{};
  std::array<std::array<Vec2, 4>, 4> dshape_{};
  std::array<Vec2, 4> ref_{};
};

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw DomainError(std::string(what) + ": field has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(n));
}

// ---------------------------------------------------------------------------
// Quadrature-point operators

/// Sparse map from vector dofs to per-qp gradients, row 4 q + (2 a + b) holds d_b y_a.
inline SparseMatrix gradient_operator(const Grid2& g) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(g.num_qp()) * 16);
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      const int q = 4 * c + ql;
      for (int a = 0; a < 4; ++a)
        for (int comp = 0; comp < 2; ++comp)
          for (int b = 0; b < 2; ++b) t.emplace_back(4 * q + 2 * comp + b, 2 * nodes[a] + comp, g.dshape(ql, a)[b]);
    }
  }
  SparseMatrix B(4 * g.num_qp(), 2 * g.num_nodes());
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

/// Sparse map from nodal scalars to qp values.
inline SparseMatrix value_operator(const Grid2& g) {
  Triplets t;
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql)
      for (int a = 0; a < 4; ++a) t.emplace_back(4 * c + ql, nodes[a], g.shape(ql, a));
  }
  SparseMatrix V(g.num_qp(), g.num_nodes());
  V.setFromTriplets(t.begin(), t.end());
  return V;
}

/// Nodal second differences: three-point central stencils, one-sided
/// f0 - 2 f1 + f2 at the ends; the mixed derivative composes second-order
/// first differences. All three are exact on quadratics.
struct NodalSecondDifferences {
  SparseMatrix Dxx, Dxy, Dyy;
};

inline NodalSecondDifferences nodal_second_differences(const Grid2& g) {
  const int nx = g.nx(), ny = g.ny(), N = g.num_nodes();
  Triplets txx, tyy, tx, ty;
  auto second = [](int i, int n, std::array<int, 3>& idx, std::array<double, 3>& w) {
    if (i == 0) idx = {0, 1, 2};
    else if (i == n) idx = {n - 2, n - 1, n};
    else idx = {i - 1, i, i + 1};
    w = {1.0, -2.0, 1.0};
  };
  auto first = [](int i, int n, std::array<int, 3>& idx, std::array<double, 3>& w) {
    if (i == 0) {
      idx = {0, 1, 2};
      w = {-1.5, 2.0, -0.5};
    } else if (i == n) {
      idx = {n - 2, n - 1, n};
      w = {0.5, -2.0, 1.5};
    } else {
      idx = {i - 1, i, i + 1};
      w = {-0.5, 0.0, 0.5};
    }
  };
  std::array<int, 3> idx;
  std::array<double, 3> w;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const int r = g.node(i, j);
      second(i, nx, idx, w);
      for (int k = 0; k < 3; ++k) txx.emplace_back(r, g.node(idx[k], j), w[k] / (g.hx() * g.hx()));
      second(j, ny, idx, w);
      for (int k = 0; k < 3; ++k) tyy.emplace_back(r, g.node(i, idx[k]), w[k] / (g.hy() * g.hy()));
      first(i, nx, idx, w);
      for (int k = 0; k < 3; ++k)
        if (w[k] != 0.0) tx.emplace_back(r, g.node(idx[k], j), w[k] / g.hx());
      first(j, ny, idx, w);
      for (int k = 0; k < 3; ++k)
        if (w[k] != 0.0) ty.emplace_back(r, g.node(i, idx[k]), w[k] / g.hy());
    }
  NodalSecondDifferences d;
  SparseMatrix Dx(N, N), Dy(N, N);
  d.Dxx.resize(N, N);
  d.Dyy.resize(N, N);
  d.Dxx.setFromTriplets(txx.begin(), txx.end());
  d.Dyy.setFromTriplets(tyy.begin(), tyy.end());
  Dx.setFromTriplets(tx.begin(), tx.end());
  Dy.setFromTriplets(ty.begin(), ty.end());
  d.Dxy = Dx * Dy;
  return d;
}

/// Sparse map from vector dofs to per-qp second gradients, row 8 q + 4 k + 2 a + b
/// holds d_k d_b y_a (the flattened Gradient3).
inline SparseMatrix hessian_operator(const Grid2& g) {
  const auto d = nodal_second_differences(g);
  const SparseMatrix V = value_operator(g);
  const SparseMatrix Vxx = V * d.Dxx, Vxy = V * d.Dxy, Vyy = V * d.Dyy;
  Triplets t;
  auto emit = [&](const SparseMatrix& M, int kb_slot) {
    for (int q = 0; q < M.outerSize(); ++q)
      for (SparseMatrix::InnerIterator it(M, q); it; ++it)
        for (int comp = 0; comp < 2; ++comp) {
          // kb_slot encodes (k, b): 0 -> (0,0), 1 -> (0,1) and (1,0), 2 -> (1,1)
          if (kb_slot == 1) {
            t.emplace_back(8 * q + 4 * 0 + 2 * comp + 1, 2 * it.col() + comp, it.value());
            t.emplace_back(8 * q + 4 * 1 + 2 * comp + 0, 2 * it.col() + comp, it.value());
          } else {
            const int k = kb_slot == 0 ? 0 : 1;
            t.emplace_back(8 * q + 4 * k + 2 * comp + k, 2 * it.col() + comp, it.value());
          }
        }
  };
  emit(Vxx, 0);
  emit(Vxy, 1);
  emit(Vyy, 2);
  SparseMatrix H(8 * g.num_qp(), 2 * g.num_nodes());
  H.setFromTriplets(t.begin(), t.end());
  return H;
}

/// Cached operators of one grid.
struct GridOperators {
  SparseMatrix B;   // gradients
  SparseMatrix Hs;  // second gradients
  SparseMatrix V;   // scalar values
  SparseMatrix Gs;  // scalar gradients, row 2 q + k
  explicit GridOperators(const Grid2& g) : B(gradient_operator(g)), Hs(hessian_operator(g)), V(value_operator(g)) {
    Triplets t;
    for (int c = 0; c < g.num_cells(); ++c) {
      const auto nodes = g.cell_nodes(c);
      for (int ql = 0; ql < 4; ++ql)
        for (int a = 0; a < 4; ++a)
          for (int k = 0; k < 2; ++k) t.emplace_back(2 * (4 * c + ql) + k, nodes[a], g.dshape(ql, a)[k]);
    }
    Gs.resize(2 * g.num_qp(), g.num_nodes());
    Gs.setFromTriplets(t.begin(), t.end());
  }
};

inline std::vector<Mat2> unpack_mat2(const Vector& flat) {
  std::vector<Mat2> out(static_cast<std::size_t>(flat.size() / 4));
  for (std::size_t q = 0; q < out.size(); ++q)
    for (int p = 0; p < 4; ++p) out[q].a[p] = flat[4 * q + p];
  return out;
}
inline std::vector<Gradient3> unpack_gradient3(const Vector& flat) {
  std::vector<Gradient3> out(static_cast<std::size_t>(flat.size() / 8));
  for (std::size_t q = 0; q < out.size(); ++q)
    for (int k = 0; k < 2; ++k)
      for (int p = 0; p < 4; ++p) out[q].slice[k].a[p] = flat[8 * q + 4 * k + p];
  return out;
}

inline std::vector<Mat2> gradient_at_qp(const Grid2& g, const Vector& y) {
  require_size(y, 2 * g.num_nodes(), "gradient_at_qp");
  return unpack_mat2(gradient_operator(g) * y);
}
inline std::vector<Vec2> scalar_gradient_at_qp(const Grid2& g, const Vector& f) {
  require_size(f, g.num_nodes(), "scalar_gradient_at_qp");
  std::vector<Vec2> out(g.num_qp());
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      Vec2 v;
      for (int a = 0; a < 4; ++a) v += f[nodes[a]] * g.dshape(ql, a);
      out[4 * c + ql] = v;
    }
  }
  return out;
}
inline std::vector<double> values_at_qp(const Grid2& g, const Vector& f) {
  require_size(f, g.num_nodes(), "values_at_qp");
  std::vector<double> out(g.num_qp());
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += f[nodes[a]] * g.shape(ql, a);
      out[4 * c + ql] = v;
    }
  }
  return out;
}
inline std::vector<Vec2> vector_values_at_qp(const Grid2& g, const Vector& u) {
  require_size(u, 2 * g.num_nodes(), "vector_values_at_qp");
  std::vector<Vec2> out(g.num_qp());
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      Vec2 v;
      for (int a = 0; a < 4; ++a) v += g.shape(ql, a) * Vec2{{u[2 * nodes[a]], u[2 * nodes[a] + 1]}};
      out[4 * c + ql] = v;
    }
  }
  return out;
}
inline std::vector<Gradient3> hessian_at_qp(const Grid2& g, const Vector& y) {
  require_size(y, 2 * g.num_nodes(), "hessian_at_qp");
  return unpack_gradient3(hessian_operator(g) * y);
}

/// Smallest det(grad y) over all quadrature points.
inline std::pair<double, int> min_det(const std::vector<Mat2>& F) {
  double m = std::numeric_limits<double>::infinity();
  int at = -1;
  for (std::size_t q = 0; q < F.size(); ++q) {
    const double d = det(F[q]);
    if (!(d >= m)) {
      m = d;
      at = static_cast<int>(q);
    }
  }
  return {m, at};
}
inline void require_feasible(const std::vector<Mat2>& F, const char* where) {
  const auto [m, q] = min_det(F);
  if (!(m > 0.0))
    throw InfeasibleStateError(std::string(where) + ": det(grad y) = " + fmt_short(m) + " at quadrature point " +
                                   std::to_string(q),
                               static_cast<std::size_t>(std::max(q, 0)), m);
}

/// Compensated sum.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

// ---------------------------------------------------------------------------
// State and energies

struct State {
  Vector y;
  Vector theta;
  double t = 0.0;
};

struct EnergyIntegrals {
  double M = 0.0;          // int W_el(grad y) + H(grad^2 y)
  double Wcpl = 0.0;       // int W_cpl(grad y, theta)
  double Win = 0.0;        // int W_in(grad y, theta)
  double E_shifted = 0.0;  // M + int W_cpl(grad y, theta_c) + alpha/2 int |W_in(theta) - W_in(theta_c)|^(2/alpha)
};

inline EnergyIntegrals integrate_energy(const Grid2& g, const std::vector<Mat2>& F, const std::vector<Gradient3>& G,
                                        const std::vector<double>& th, const Material& mat, double eps) {
  require_feasible(F, "integrate_energy");
  const double w = g.qp_weight();
  const double alpha = mat.alpha;
  KahanSum M, Wc, Wi, Wcc, Sh;
  for (int q = 0; q < g.num_qp(); ++q) {
    if (th[q] < 0.0) throw DomainError("integrate_energy: negative temperature at quadrature point " + std::to_string(q));
    M.add(w * (elastic_energy(mat, F[q]) + hyper_energy(mat, G[q])));
    Wc.add(w * coupling_energy(mat, F[q], th[q], eps));
    const double win = internal_energy(mat, F[q], th[q], eps);
    Wi.add(w * win);
    Wcc.add(w * coupling_energy(mat, F[q], mat.theta_c, eps));
    const double dev = std::fabs(win - internal_energy(mat, F[q], mat.theta_c, eps));
    Sh.add(w * 0.5 * alpha * std::pow(dev, 2.0 / alpha));
  }
  EnergyIntegrals e;
  e.M = M.value();
  e.Wcpl = Wc.value();
  e.Win = Wi.value();
  e.E_shifted = e.M + Wcc.value() + Sh.value();
  return e;
}

inline EnergyIntegrals integrate_energy(const Grid2& g, const GridOperators& ops, const State& s, const Material& mat,
                                        double eps) {
  require_size(s.y, 2 * g.num_nodes(), "integrate_energy");
  require_size(s.theta, g.num_nodes(), "integrate_energy");
  return integrate_energy(g, unpack_mat2(ops.B * s.y), unpack_gradient3(ops.Hs * s.y), values_at_qp(g, s.theta), mat,
                          eps);
}
inline EnergyIntegrals integrate_energy(const Grid2& g, const State& s, const Material& mat, double eps) {
  return integrate_energy(g, GridOperators(g), s, mat, eps);
}

/// Quadrature of a per-qp density.
inline double integrate_qp(const Grid2& g, const std::vector<double>& density) {
  KahanSum s;
  for (double d : density) s.add(g.qp_weight() * d);
  return s.value();
}

// ---------------------------------------------------------------------------
// Assembly

/// K_ij = int grad phi_i : C grad phi_j for a vector field, C per qp.
template <class TensorAt>
SparseMatrix assemble_vector_stiffness(const Grid2& g, TensorAt&& C_at) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(g.num_cells()) * 64);
  const double w = g.qp_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    std::array<double, 64> Ke{};
    for (int ql = 0; ql < 4; ++ql) {
      const Tensor4 C = C_at(4 * c + ql);
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 2; ++i) {
          Mat2 Ga;
          Ga(i, 0) = g.dshape(ql, a)[0];
          Ga(i, 1) = g.dshape(ql, a)[1];
          const Mat2 CGa = C * Ga;
          for (int b = 0; b < 4; ++b)
            for (int j = 0; j < 2; ++j)
              Ke[(2 * b + j) * 8 + 2 * a + i] +=
                  w * (CGa(j, 0) * g.dshape(ql, b)[0] + CGa(j, 1) * g.dshape(ql, b)[1]);
        }
    }
    for (int r = 0; r < 8; ++r)
      for (int s = 0; s < 8; ++s) t.emplace_back(2 * nodes[r / 2] + r % 2, 2 * nodes[s / 2] + s % 2, Ke[r * 8 + s]);
  }
  SparseMatrix K(2 * g.num_nodes(), 2 * g.num_nodes());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

/// K_ij = int grad phi_i . A grad phi_j for a scalar field, A per qp.
template <class MatAt>
SparseMatrix assemble_scalar_stiffness(const Grid2& g, MatAt&& A_at) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(g.num_cells()) * 16);
  const double w = g.qp_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    std::array<double, 16> Ke{};
    for (int ql = 0; ql < 4; ++ql) {
      const Mat2 A = A_at(4 * c + ql);
      for (int a = 0; a < 4; ++a) {
        const Vec2 AG = A * g.dshape(ql, a);
        for (int b = 0; b < 4; ++b) Ke[b * 4 + a] += w * dot(g.dshape(ql, b), AG);
      }
    }
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s) t.emplace_back(nodes[r], nodes[s], Ke[r * 4 + s]);
  }
  SparseMatrix K(g.num_nodes(), g.num_nodes());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

/// Consistent scalar mass matrix int c phi_i phi_j.
template <class CoefAt>
SparseMatrix assemble_mass(const Grid2& g, CoefAt&& c_at) {
  Triplets t;
  const double w = g.qp_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      const double k = c_at(4 * c + ql);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) t.emplace_back(nodes[a], nodes[b], w * k * g.shape(ql, a) * g.shape(ql, b));
    }
  }
  SparseMatrix M(g.num_nodes(), g.num_nodes());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

/// Lumped nodal integrals sum_q w phi_i(q) c(q).
template <class CoefAt>
Vector lumped_integral(const Grid2& g, CoefAt&& c_at) {
  Vector m = Vector::Zero(g.num_nodes());
  const double w = g.qp_weight();
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      const double k = c_at(4 * c + ql);
      for (int a = 0; a < 4; ++a) m[nodes[a]] += w * k * g.shape(ql, a);
    }
  }
  return m;
}

/// Lumped boundary measure of every node (sum of half the adjacent boundary edge lengths).
inline Vector boundary_lumped_length(const Grid2& g) {
  Vector l = Vector::Zero(g.num_nodes());
  for (const auto& e : g.boundary_edges()) {
    l[e.n0] += 0.5 * e.length;
    l[e.n1] += 0.5 * e.length;
  }
  return l;
}

/// Load vector <l, v> = int f . v dx + int_{x=1} g . v ds, with f and g
/// functions of position. The traction integral uses 2-point Gauss on each edge.
template <class F, class G>
Vector assemble_load(const Grid2& grid, F&& f_fn, G&& g_fn) {
  Vector l = Vector::Zero(2 * grid.num_nodes());
  const double w = grid.qp_weight();
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    for (int ql = 0; ql < 4; ++ql) {
      const Vec2 f = f_fn(grid.qp_position(4 * c + ql));
      for (int a = 0; a < 4; ++a) {
        l[2 * nodes[a]] += w * f[0] * grid.shape(ql, a);
        l[2 * nodes[a] + 1] += w * f[1] * grid.shape(ql, a);
      }
    }
  }
  const double gp = 0.5 / std::sqrt(3.0);
  for (const auto& e : grid.traction_edges()) {
    const Vec2 x0 = grid.position(e.n0), x1 = grid.position(e.n1);
    for (double s : {0.5 - gp, 0.5 + gp}) {
      const Vec2 x = (1.0 - s) * x0 + s * x1;
      const Vec2 gv = g_fn(x);
      for (int comp = 0; comp < 2; ++comp) {
        l[2 * e.n0 + comp] += 0.5 * e.length * gv[comp] * (1.0 - s);
        l[2 * e.n1 + comp] += 0.5 * e.length * gv[comp] * s;
      }
    }
  }
  return l;
}

/// Mask of free (non-Dirichlet) vector dofs.
inline std::vector<int> free_vector_dofs(const Grid2& g) {
  std::vector<int> free;
  for (int n = 0; n < g.num_nodes(); ++n)
    if (!g.is_dirichlet(n)) {
      free.push_back(2 * n);
      free.push_back(2 * n + 1);
    }
  return free;
}

/// Restriction of a sparse matrix to rows and columns in `keep` (sorted).
inline SparseMatrix restrict_matrix(const SparseMatrix& A, const std::vector<int>& keep) {
  std::vector<int> map(A.cols(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) map[keep[k]] = static_cast<int>(k);
  Triplets t;
  for (int r : keep)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (map[it.col()] >= 0) t.emplace_back(map[r], map[it.col()], it.value());
  SparseMatrix R(keep.size(), keep.size());
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

// ---------------------------------------------------------------------------
// Discrete norms

inline double l2_norm_scalar(const Grid2& g, const Vector& f) {
  const auto v = values_at_qp(g, f);
  KahanSum s;
  for (double x : v) s.add(g.qp_weight() * x * x);
  return std::sqrt(s.value());
}
inline double l2_norm_vector(const Grid2& g, const Vector& u) {
  const auto v = vector_values_at_qp(g, u);
  KahanSum s;
  for (const auto& x : v) s.add(g.qp_weight() * dot(x, x));
  return std::sqrt(s.value());
}
inline double l2_norm_gradient(const Grid2& g, const Vector& u) {
  const auto G = gradient_at_qp(g, u);
  KahanSum s;
  for (const auto& x : G) s.add(g.qp_weight() * ddot(x, x));
  return std::sqrt(s.value());
}
inline double h1_norm_vector(const Grid2& g, const Vector& u) {
  const double a = l2_norm_vector(g, u), b = l2_norm_gradient(g, u);
  return std::sqrt(a * a + b * b);
}

// ---------------------------------------------------------------------------
// Field dumps

inline void write_field(const std::string& path, const std::string& name, const Grid2& g, const Vector& v, int comps) {
  require_size(v, comps * g.num_nodes(), "write_field");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "field " << name << " nx " << g.nx() << " ny " << g.ny() << " comps " << comps << "\n";
  for (int n = 0; n < g.num_nodes(); ++n) {
    for (int c = 0; c < comps; ++c) out << (c ? " " : "") << fmt17(v[comps * n + c]);
    out << "\n";
  }
}

struct FieldDump {
  std::string name;
  int nx = 0, ny = 0, comps = 0;
  Vector values;
};

inline FieldDump read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  FieldDump d;
  std::string tag, kx, ky, kc;
  in >> tag >> d.name >> kx >> d.nx >> ky >> d.ny >> kc >> d.comps;
  if (tag != "field" || kx != "nx" || ky != "ny" || kc != "comps" || d.nx < 1 || d.ny < 1 || d.comps < 1)
    throw std::runtime_error(path + ": malformed field header");
  const int n = (d.nx + 1) * (d.ny + 1) * d.comps;
  d.values.resize(n);
  for (int k = 0; k < n; ++k)
    if (!(in >> d.values[k])) throw std::runtime_error(path + ": truncated field data");
  return d;
}

}  // namespace thermovisc
