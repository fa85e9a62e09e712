// Shared helpers for the test suites: independent oracles (dense elimination,
// compensated summation) and small random-data generators.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pdegm/fem1d.hpp"

namespace testutil {

inline double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Dense Gaussian elimination with partial pivoting; oracle for the
// tridiagonal solver.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t m = b.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < m; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    if (a[k][k] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    for (std::size_t i = k + 1; i < m; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < m; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < m; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<double>> to_dense(const pdegm::TridiagonalOperator& t) {
  const std::size_t m = t.order();
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    a[i][i] = t.diag[i];
    if (i > 0) a[i][i - 1] = t.sub[i - 1];
    if (i + 1 < m) a[i][i + 1] = t.super[i];
  }
  return a;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
};

inline pdegm::ElementField random_element_field(Rng& rng, std::size_t n, double lo, double hi) {
  pdegm::ElementField f(n);
  for (auto& v : f) v = rng.uniform(lo, hi);
  return f;
}

inline pdegm::NodalField random_nodal_field(Rng& rng, std::size_t n_nodes, double lo, double hi) {
  pdegm::NodalField f(n_nodes);
  for (auto& v : f) v = rng.uniform(lo, hi);
  return f;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Element-midpoint sampling of the benchmark coefficient 2 - |x|.
inline pdegm::ElementField truth_coefficient(const pdegm::Mesh1D& mesh) {
  pdegm::ElementField u(static_cast<std::size_t>(mesh.n));
  for (std::size_t e = 0; e < u.size(); ++e) u[e] = 2.0 - std::abs(mesh.midpoints[e]);
  return u;
}

}  // namespace testutil
