/* One-dimensional piecewise-linear finite elements on Omega = (-1, 1) for the
 * elliptic solution operator u -> y = S(u) defined by the weak form
 *
 *     <y', v'> + <u y, v> = <f, v>   for all v in H^1(Omega)
 *
 * (natural boundary conditions) with a piecewise-constant coefficient u > 0.
 * Besides the forward solve, this header provides the directional derivative
 * w = S'(u) du and the adjoint S'(u)* p, both as solutions of the same
 * tridiagonal system with different right-hand sides.
 *
 * Discrete metrics: element fields pair with the element inner product
 * h * sum_e a_e b_e, nodal fields with the mass-lumped inner product
 * sum_j w_j a_j b_j.  The adjoint returned by adjoint_apply() is exact with
 * respect to this pair of inner products, so the identity
 * <S'(u) du, p>_nodal = <du, S'(u)* p>_element holds to solver precision.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdegm {

/// Strongly typed value vector; Tag distinguishes per-element from per-node data.
template <class Tag>
struct Field {
  std::vector<double> values;

  Field() = default;
  explicit Field(std::size_t count, double fill = 0.0) : values(count, fill) {}

  static Field constant(std::size_t count, double value) { return Field(count, value); }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  const double& operator[](std::size_t i) const { return values[i]; }

  auto begin() { return values.begin(); }
  auto end() { return values.end(); }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }
};

/// Piecewise-constant function, one value per element (the coefficient u).
using ElementField = Field<struct ElementFieldTag>;
/// Piecewise-linear function, one value per node (states y and duals p).
using NodalField = Field<struct NodalFieldTag>;

/// Uniform partition of (-1, 1) into n elements.
struct Mesh1D {
  int n = 0;
  double h = 0.0;
  std::vector<double> nodes;           // n+1, strictly increasing, mirrored about 0
  std::vector<double> lumped_weights;  // n+1, h/2 at the two boundary nodes, h inside
  std::vector<double> midpoints;       // n, element midpoints (exactly odd about 0)
};

inline Mesh1D build_mesh(int n) {
  if (n < 2) {
    throw std::invalid_argument("build_mesh: need at least 2 elements, got " + std::to_string(n));
  }
  Mesh1D mesh;
  mesh.n = n;
  mesh.h = 2.0 / n;
  mesh.nodes.resize(static_cast<std::size_t>(n) + 1);
  // Mirror the right half from the left so the mesh is symmetric in exact
  // floating point: x_j + x_{n-j} == 0.
  for (int j = 0; 2 * j < n; ++j) {
    const double x = -1.0 + j * mesh.h;
    mesh.nodes[static_cast<std::size_t>(j)] = x;
    mesh.nodes[static_cast<std::size_t>(n - j)] = -x;
  }
  if (n % 2 == 0) mesh.nodes[static_cast<std::size_t>(n) / 2] = 0.0;

  mesh.lumped_weights.assign(static_cast<std::size_t>(n) + 1, mesh.h);
  mesh.lumped_weights.front() = 0.5 * mesh.h;
  mesh.lumped_weights.back() = 0.5 * mesh.h;

  mesh.midpoints.resize(static_cast<std::size_t>(n));
  for (int e = 0; 2 * e < n; ++e) {
    const double m = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
    mesh.midpoints[static_cast<std::size_t>(e)] = m;
    mesh.midpoints[static_cast<std::size_t>(n - 1 - e)] = -m;
  }
  return mesh;
}

/// Symmetric tridiagonal matrix of order n+1 in band storage.
struct TridiagonalOperator {
  std::vector<double> sub;    // length order-1
  std::vector<double> diag;   // length order
  std::vector<double> super;  // length order-1, equals sub for our assemblies

  std::size_t order() const { return diag.size(); }
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stiffness plus coefficient-weighted consistent mass:
/// per element, (1/h) [[1,-1],[-1,1]] + u_e (h/6) [[2,1],[1,2]].
inline TridiagonalOperator assemble_operator(const Mesh1D& mesh, const ElementField& u) {
  const auto n = static_cast<std::size_t>(mesh.n);
  if (u.size() != n) {
    throw std::invalid_argument("assemble_operator: coefficient has " + std::to_string(u.size()) +
                                " values, mesh has " + std::to_string(n) + " elements");
  }
  TridiagonalOperator a;
  a.diag.assign(n + 1, 0.0);
  a.sub.assign(n, 0.0);
  const double stiff = 1.0 / mesh.h;
  for (std::size_t e = 0; e < n; ++e) {
    const double mass = u[e] * mesh.h / 6.0;
    a.diag[e] += stiff + 2.0 * mass;
    a.diag[e + 1] += stiff + 2.0 * mass;
    a.sub[e] = -stiff + mass;
  }
  a.super = a.sub;
  return a;
}

inline NodalField apply(const TridiagonalOperator& a, const NodalField& x) {
  const std::size_t m = a.order();
  if (x.size() != m) throw std::invalid_argument("apply: size mismatch");
  NodalField y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = a.diag[i] * x[i];
    if (i > 0) s += a.sub[i - 1] * x[i - 1];
    if (i + 1 < m) s += a.super[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

namespace detail {

inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  err = (a - av) + (b - bv);
}

// s + comp accumulates sum += a*x with the rounding errors tracked in comp.
inline void accumulate_product(double a, double x, double& s, double& comp) {
  const double p = a * x;
  const double perr = std::fma(a, x, -p);
  double t = 0.0, terr = 0.0;
  two_sum(s, p, t, terr);
  s = t;
  comp += perr + terr;
}

}  // namespace detail

/// Thomas factorization of a positive definite tridiagonal matrix.  solve()
/// performs one iterative-refinement pass with a compensated residual, which
/// keeps the forward error at a few ulps even for the stiffness-dominated
/// systems arising from fine meshes.
class TridiagonalSolver {
 public:
  explicit TridiagonalSolver(TridiagonalOperator a) : a_(std::move(a)) {
    const std::size_t m = a_.order();
    if (m == 0) throw std::invalid_argument("TridiagonalSolver: empty matrix");
    pivot_.resize(m);
    upper_.assign(m, 0.0);
    double scale = 0.0;
    for (double d : a_.diag) scale = std::max(scale, std::abs(d));
    const double floor = 1e-12 * scale;
    pivot_[0] = a_.diag[0];
    if (!(pivot_[0] > floor)) fail(0);
    if (m > 1) upper_[0] = a_.super[0] / pivot_[0];
    for (std::size_t i = 1; i < m; ++i) {
      pivot_[i] = a_.diag[i] - a_.sub[i - 1] * upper_[i - 1];
      if (!(pivot_[i] > floor)) fail(i);
      if (i + 1 < m) upper_[i] = a_.super[i] / pivot_[i];
    }
  }

  NodalField solve(const NodalField& rhs) const {
    NodalField x = substitute(rhs);
    const NodalField r = residual(rhs, x);
    const NodalField dx = substitute(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    return x;
  }

  /// Raw elimination without the refinement pass; building block for solvers
  /// that refine against a more accurate residual than the stored bands.
  NodalField substitute(const NodalField& rhs) const {
    const std::size_t m = a_.order();
    if (rhs.size() != m) throw std::invalid_argument("solve: rhs size mismatch");
    NodalField x(m);
    x[0] = rhs[0] / pivot_[0];
    for (std::size_t i = 1; i < m; ++i) {
      x[i] = (rhs[i] - a_.sub[i - 1] * x[i - 1]) / pivot_[i];
    }
    for (std::size_t i = m - 1; i-- > 0;) {
      x[i] -= upper_[i] * x[i + 1];
    }
    return x;
  }

 private:
  [[noreturn]] void fail(std::size_t row) const {
    throw SolverError("tridiagonal solve: non-positive pivot at row " + std::to_string(row) +
                      " (operator not positive definite; coefficient left the feasible region?)");
  }

  NodalField residual(const NodalField& rhs, const NodalField& x) const {
    const std::size_t m = a_.order();
    NodalField r(m);
    for (std::size_t i = 0; i < m; ++i) {
      double s = rhs[i], comp = 0.0;
      detail::accumulate_product(-a_.diag[i], x[i], s, comp);
      if (i > 0) detail::accumulate_product(-a_.sub[i - 1], x[i - 1], s, comp);
      if (i + 1 < m) detail::accumulate_product(-a_.super[i], x[i + 1], s, comp);
      r[i] = s + comp;
    }
    return r;
  }

  TridiagonalOperator a_;
  std::vector<double> pivot_;
  std::vector<double> upper_;
};

inline NodalField solve_linear(const TridiagonalOperator& a, const NodalField& rhs) {
  return TridiagonalSolver(a).solve(rhs);
}

/// Stiffness-plus-mass system kept in parts.  The mixed bands mingle the
/// O(1/h) stiffness with the O(h) mass entries, so their rounded sum loses the
/// stiffness row-sum cancellation at relative level eps/h^2.  Refining against
/// the residual of the two parts separately recovers the true FEM system, for
/// which constant coefficients reproduce constant states to a few ulps.
class EllipticOperator {
 public:
  EllipticOperator(const Mesh1D& mesh, const ElementField& u)
      : stiff_(1.0 / mesh.h), mass_(u.size()), solver_(assemble_operator(mesh, u)) {
    for (std::size_t e = 0; e < u.size(); ++e) mass_[e] = u[e] * mesh.h / 6.0;
  }

  NodalField solve(const NodalField& b) const {
    NodalField x = solver_.substitute(b);
    for (int pass = 0; pass < 2; ++pass) {
      const NodalField r = residual(b, x);
      const NodalField dx = solver_.substitute(r);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    }
    return x;
  }

 private:
  // r = b - K x - M(u) x with every product error-compensated.
  NodalField residual(const NodalField& b, const NodalField& x) const {
    const std::size_t n = mass_.size();
    std::vector<double> s(b.values), comp(n + 1, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
      detail::accumulate_product(-stiff_, x[e], s[e], comp[e]);
      detail::accumulate_product(stiff_, x[e + 1], s[e], comp[e]);
      detail::accumulate_product(stiff_, x[e], s[e + 1], comp[e + 1]);
      detail::accumulate_product(-stiff_, x[e + 1], s[e + 1], comp[e + 1]);
      // The mass entries are O(h); fusing their nodal sums costs only
      // O(eps*h) in the residual.
      const double m = mass_[e];
      detail::accumulate_product(-m, 2.0 * x[e] + x[e + 1], s[e], comp[e]);
      detail::accumulate_product(-m, x[e] + 2.0 * x[e + 1], s[e + 1], comp[e + 1]);
    }
    NodalField r(n + 1);
    for (std::size_t j = 0; j <= n; ++j) r[j] = s[j] + comp[j];
    return r;
  }

  double stiff_;
  std::vector<double> mass_;
  TridiagonalSolver solver_;
};

/// Load vector of a constant right-hand side; int f phi_j is exact and equals
/// f times the lumped weight.
inline NodalField load_vector(const Mesh1D& mesh, double f) {
  NodalField b(static_cast<std::size_t>(mesh.n) + 1);
  for (std::size_t j = 0; j < b.size(); ++j) b[j] = f * mesh.lumped_weights[j];
  return b;
}

/// Consistent (unit-coefficient) mass action on a piecewise-linear g:
/// b_j = int g phi_j, per element h/6 (2 g_L + g_R) on the left node and
/// symmetrically on the right.
inline NodalField mass_apply(const Mesh1D& mesh, const NodalField& g) {
  const auto n = static_cast<std::size_t>(mesh.n);
  if (g.size() != n + 1) throw std::invalid_argument("mass_apply: size mismatch");
  NodalField b(n + 1);
  const double w = mesh.h / 6.0;
  for (std::size_t e = 0; e < n; ++e) {
    b[e] += w * (2.0 * g[e] + g[e + 1]);
    b[e + 1] += w * (g[e] + 2.0 * g[e + 1]);
  }
  return b;
}

/// y = S(u) for a constant right-hand side f.
inline NodalField forward_solve(const Mesh1D& mesh, const ElementField& u, double f = 1.0) {
  return EllipticOperator(mesh, u).solve(load_vector(mesh, f));
}

/// y = S(u) for a piecewise-linear right-hand side f.
inline NodalField forward_solve(const Mesh1D& mesh, const ElementField& u, const NodalField& f) {
  return EllipticOperator(mesh, u).solve(mass_apply(mesh, f));
}

/// w = S'(u) du, the exact derivative of the discrete forward map: solves
/// A(u) w = b with b_j = -int y du phi_j, integrated exactly per element.
inline NodalField derivative_apply(const Mesh1D& mesh, const ElementField& u, const NodalField& y,
                                   const ElementField& du) {
  const auto n = static_cast<std::size_t>(mesh.n);
  if (du.size() != n || y.size() != n + 1) {
    throw std::invalid_argument("derivative_apply: size mismatch");
  }
  NodalField b(n + 1);
  const double w = mesh.h / 6.0;
  for (std::size_t e = 0; e < n; ++e) {
    b[e] -= du[e] * w * (2.0 * y[e] + y[e + 1]);
    b[e + 1] -= du[e] * w * (y[e] + 2.0 * y[e + 1]);
  }
  return EllipticOperator(mesh, u).solve(b);
}

/// q = S'(u)* p with respect to the lumped nodal / element inner-product pair:
/// solves A(u) z = b with the lumped action b_j = -w_j p_j, then returns the
/// exact element mean of the quadratic y*z (its L2 projection onto piecewise
/// constants).
inline ElementField adjoint_apply(const Mesh1D& mesh, const ElementField& u, const NodalField& y,
                                  const NodalField& p) {
  const auto n = static_cast<std::size_t>(mesh.n);
  if (p.size() != n + 1 || y.size() != n + 1) {
    throw std::invalid_argument("adjoint_apply: size mismatch");
  }
  NodalField b(n + 1);
  for (std::size_t j = 0; j <= n; ++j) b[j] = -mesh.lumped_weights[j] * p[j];
  const NodalField z = EllipticOperator(mesh, u).solve(b);
  ElementField q(n);
  for (std::size_t e = 0; e < n; ++e) {
    q[e] = (2.0 * y[e] * z[e] + y[e] * z[e + 1] + y[e + 1] * z[e] + 2.0 * y[e + 1] * z[e + 1]) / 6.0;
  }
  return q;
}

/// Mass-lumped nodal inner product sum_j w_j a_j b_j.
inline double inner_nodal(const Mesh1D& mesh, const NodalField& a, const NodalField& b) {
  if (a.size() != b.size() || a.size() != mesh.lumped_weights.size()) {
    throw std::invalid_argument("inner_nodal: size mismatch");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += mesh.lumped_weights[j] * a[j] * b[j];
  return s;
}

/// Element inner product h sum_e a_e b_e.
inline double inner_element(const Mesh1D& mesh, const ElementField& a, const ElementField& b) {
  if (a.size() != b.size() || a.size() != static_cast<std::size_t>(mesh.n)) {
    throw std::invalid_argument("inner_element: size mismatch");
  }
  double s = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) s += a[e] * b[e];
  return mesh.h * s;
}

inline double norm_nodal(const Mesh1D& mesh, const NodalField& a) {
  return std::sqrt(inner_nodal(mesh, a, a));
}

inline double norm_element(const Mesh1D& mesh, const ElementField& a) {
  return std::sqrt(inner_element(mesh, a, a));
}

}  // namespace pdegm
