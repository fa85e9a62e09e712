/* The three model problems over the 1D elliptic operator, wired for the
 * primal-dual engine:
 *
 *   l1     min (1/alpha)||S(u) - ydelta||_L1 + 1/2 ||u||^2
 *   linf   min 1/2 ||u||^2  s.t.  |S(u) - ydelta| <= delta pointwise
 *   state  min 1/(2 alpha)||S(u) - yd||^2 + 1/2 ||u||^2  s.t.  S(u) <= c
 *
 * with K(u) = S(u) - ydelta for the fitting problems and K(u) = S(u) for the
 * state-constrained problem, and the data term replaced by its Moreau-Yosida
 * regularization F_gamma.  Includes the synthetic benchmark (coefficient
 * 2 - |x|), the two noise models, the mass-lumped functional, the step-size
 * initialization, and the strict-complementarity diagnostic.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "pdegm/fem1d.hpp"
#include "pdegm/prox.hpp"
#include "pdegm/rng.hpp"

namespace pdegm {

/// Synthetic data generation: which corruption to apply to y+ = S(u+).
struct NoiseConfig {
  enum class Kind { none, impulsive, quantize };
  Kind kind = Kind::none;
  double r = 0.3;          // per-node corruption probability (impulsive)
  double delta = 0.1;      // noise standard deviation as a fraction (impulsive)
  int n_bins = 11;         // quantization bin count
  std::uint64_t seed = 0;  // RNG seed
  std::uint64_t replicate = 0;
};

/// Exact coefficient u+(x) = 2 - |x| sampled at element midpoints, and the
/// matching state y+ = S(u+).
inline std::pair<ElementField, NodalField> make_truth(const Mesh1D& mesh) {
  ElementField u(static_cast<std::size_t>(mesh.n));
  for (std::size_t e = 0; e < u.size(); ++e) u[e] = 2.0 - std::abs(mesh.midpoints[e]);
  NodalField y = forward_solve(mesh, u, 1.0);
  return {std::move(u), std::move(y)};
}

/// Impulsive noise: each node independently receives ||y||_lumped times a
/// N(0, delta^2) sample with probability r.
inline NodalField add_impulsive_noise(const Mesh1D& mesh, const NodalField& y, double r,
                                      double delta, std::uint64_t seed,
                                      std::uint64_t replicate = 0) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("add_impulsive_noise: r must be in [0, 1]");
  if (!(delta >= 0.0)) throw std::invalid_argument("add_impulsive_noise: delta must be nonnegative");
  const double scale = norm_nodal(mesh, y);
  RandomStream rng(seed, replicate);
  NodalField out = y;
  for (auto& v : out) {
    if (rng.uniform01() < r) v += scale * delta * rng.normal();
  }
  return out;
}

/// Bin width for quantization to n_bins equidistant levels.
inline double quantize_step(const NodalField& y, int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("quantize_step: need at least 2 bins");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double step = (*hi - *lo) / n_bins;
  if (!(step > 0.0)) throw std::invalid_argument("quantize_step: data is constant");
  return step;
}

inline NodalField quantize_with_step(const NodalField& y, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("quantize_with_step: step must be positive");
  NodalField out = y;
  for (auto& v : out) v = step * std::round(v / step);
  return out;
}

/// Rounds every nodal value to the nearest multiple of the bin width.
inline NodalField quantize(const NodalField& y, int n_bins) {
  return quantize_with_step(y, quantize_step(y, n_bins));
}

/// One model problem bound to a mesh and data, exposing the callbacks the
/// engine iterates on.  All members are pure given the stored data.
struct ProblemSpec {
  ProblemFamily family = ProblemFamily::l1;
  Mesh1D mesh;
  double alpha = 1.0;   // data-term weight (l1, state)
  double gamma = 0.0;   // Moreau-Yosida parameter
  double delta = 0.0;   // linf noise bound
  double cbound = 0.0;  // state constraint
  double f_const = 1.0; // PDE right-hand side
  NodalField data;      // ydelta (l1, linf) or yd (state)

  NodalField forward(const ElementField& u) const { return forward_solve(mesh, u, f_const); }

  /// K(u) from the forward state: residual against the data for the fitting
  /// problems, the state itself for the constrained problem.
  NodalField k_value(NodalField y) const {
    if (family != ProblemFamily::state) {
      for (std::size_t j = 0; j < y.size(); ++j) y[j] -= data[j];
    }
    return y;
  }

  ElementField adjoint_gradient(const ElementField& u, const NodalField& y,
                                const NodalField& p) const {
    return adjoint_apply(mesh, u, y, p);
  }

  ElementField prox_primal(ElementField u, double tau) const { return prox_g(std::move(u), tau); }

  NodalField prox_dual(NodalField r, double sigma) const {
    switch (family) {
      case ProblemFamily::l1:
        for (auto& v : r) v = prox_fstar_l1(v, sigma, alpha, gamma);
        break;
      case ProblemFamily::linf:
        for (auto& v : r) v = prox_fstar_linf(v, sigma, delta, gamma);
        break;
      case ProblemFamily::state:
        for (std::size_t j = 0; j < r.size(); ++j) {
          r[j] = prox_fstar_state(r[j], sigma, alpha, gamma, cbound, data[j]);
        }
        break;
    }
    return r;
  }

  /// J_gamma(u) = sum_j w_j f_gamma(K(u)_j) + 1/2 ||u||^2, both terms mass
  /// lumped so values are comparable across meshes.
  double objective(const ElementField& u, const NodalField& y) const {
    const ScalarProxSpec s = scalar_spec();
    double fterm = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double t = family == ProblemFamily::state ? y[j] : y[j] - data[j];
      const double yd = family == ProblemFamily::state ? data[j] : 0.0;
      fterm += mesh.lumped_weights[j] * fgamma_value(s, t, yd);
    }
    return fterm + 0.5 * inner_element(mesh, u, u);
  }

  /// Pointwise constraint violation: max over nodes, zero for the l1 problem.
  double feasibility(const NodalField& y) const {
    double worst = 0.0;
    switch (family) {
      case ProblemFamily::l1:
        break;
      case ProblemFamily::linf:
        for (std::size_t j = 0; j < y.size(); ++j) {
          worst = std::max(worst, std::abs(y[j] - data[j]) - delta);
        }
        break;
      case ProblemFamily::state:
        for (std::size_t j = 0; j < y.size(); ++j) worst = std::max(worst, y[j] - cbound);
        break;
    }
    return std::max(worst, 0.0);
  }

  ScalarProxSpec scalar_spec() const {
    ScalarProxSpec s;
    s.family = family;
    s.alpha = alpha;
    s.gamma = gamma;
    s.delta = delta;
    s.c = cbound;
    return s;
  }
};

inline ProblemSpec make_l1_problem(Mesh1D mesh, double alpha, double gamma, NodalField y_delta) {
  if (!(alpha > 0.0)) throw std::invalid_argument("make_l1_problem: alpha must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("make_l1_problem: gamma must be nonnegative");
  if (y_delta.size() != static_cast<std::size_t>(mesh.n) + 1) {
    throw std::invalid_argument("make_l1_problem: data length mismatch");
  }
  ProblemSpec p;
  p.family = ProblemFamily::l1;
  p.mesh = std::move(mesh);
  p.alpha = alpha;
  p.gamma = gamma;
  p.data = std::move(y_delta);
  return p;
}

inline ProblemSpec make_linf_problem(Mesh1D mesh, double delta, double gamma, NodalField y_delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("make_linf_problem: delta must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("make_linf_problem: gamma must be nonnegative");
  if (y_delta.size() != static_cast<std::size_t>(mesh.n) + 1) {
    throw std::invalid_argument("make_linf_problem: data length mismatch");
  }
  ProblemSpec p;
  p.family = ProblemFamily::linf;
  p.mesh = std::move(mesh);
  p.delta = delta;
  p.gamma = gamma;
  p.data = std::move(y_delta);
  return p;
}

inline ProblemSpec make_state_problem(Mesh1D mesh, double alpha, double gamma, double cbound,
                                      NodalField y_desired) {
  if (!(alpha > 0.0)) throw std::invalid_argument("make_state_problem: alpha must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("make_state_problem: gamma must be nonnegative");
  if (y_desired.size() != static_cast<std::size_t>(mesh.n) + 1) {
    throw std::invalid_argument("make_state_problem: data length mismatch");
  }
  ProblemSpec p;
  p.family = ProblemFamily::state;
  p.mesh = std::move(mesh);
  p.alpha = alpha;
  p.gamma = gamma;
  p.cbound = cbound;
  p.data = std::move(y_desired);
  return p;
}

/// Numeric parameters of make_problem; delta = 0 for the linf family derives
/// the bound from the quantization width as step/2.
struct ProblemParams {
  double alpha = 1e-2;
  double gamma = 1e-12;
  double delta = 0.0;
  double cbound = 0.68;
};

/// Builds a model problem with synthetic data: truth, corruption per the
/// noise config, then the callback wiring for the requested family.
inline ProblemSpec make_problem(ProblemFamily family, const Mesh1D& mesh,
                                const ProblemParams& params, const NoiseConfig& noise) {
  auto [u_truth, y_truth] = make_truth(mesh);
  (void)u_truth;
  switch (family) {
    case ProblemFamily::l1: {
      NodalField data = y_truth;
      if (noise.kind == NoiseConfig::Kind::impulsive) {
        data = add_impulsive_noise(mesh, y_truth, noise.r, noise.delta, noise.seed, noise.replicate);
      } else if (noise.kind != NoiseConfig::Kind::none) {
        throw std::invalid_argument("make_problem: l1 family takes impulsive or no noise");
      }
      return make_l1_problem(mesh, params.alpha, params.gamma, std::move(data));
    }
    case ProblemFamily::linf: {
      NodalField data = y_truth;
      double delta = params.delta;
      if (noise.kind == NoiseConfig::Kind::quantize) {
        const double step = quantize_step(y_truth, noise.n_bins);
        data = quantize_with_step(y_truth, step);
        if (delta <= 0.0) delta = 0.5 * step;  // quantization error bound
      } else if (noise.kind != NoiseConfig::Kind::none) {
        throw std::invalid_argument("make_problem: linf family takes quantization or no noise");
      }
      return make_linf_problem(mesh, delta, params.gamma, std::move(data));
    }
    case ProblemFamily::state: {
      if (noise.kind != NoiseConfig::Kind::none) {
        throw std::invalid_argument("make_problem: state family uses noiseless desired state");
      }
      return make_state_problem(mesh, params.alpha, params.gamma, params.cbound,
                                std::move(y_truth));
    }
  }
  throw std::invalid_argument("make_problem: unknown family");
}

inline double functional_value(const ProblemSpec& prob, const ElementField& u) {
  return prob.objective(u, prob.forward(u));
}

inline double feasibility_metric(const ProblemSpec& prob, const ElementField& u) {
  return prob.feasibility(prob.forward(u));
}

/// sigma0 = 1/L and tau0 = 0.99/L from the crude Lipschitz estimate
/// L = max(1, ||S'(u0) u0|| / ||u0||).
struct StepSizeInit {
  double l_estimate = 1.0;
  double sigma0 = 1.0;
  double tau0 = 0.99;
};

inline StepSizeInit lipschitz_estimate(const ProblemSpec& prob, const ElementField& u0) {
  const double u_norm = norm_element(prob.mesh, u0);
  if (!(u_norm > 0.0)) throw std::invalid_argument("lipschitz_estimate: u0 must be nonzero");
  const NodalField y = prob.forward(u0);
  const NodalField w = derivative_apply(prob.mesh, u0, y, u0);
  StepSizeInit init;
  init.l_estimate = std::max(1.0, norm_nodal(prob.mesh, w) / u_norm);
  init.sigma0 = 1.0 / init.l_estimate;
  init.tau0 = 0.99 / init.l_estimate;
  return init;
}

/// Pointwise classification of the state-constraint dual into its two
/// derivative branches, plus the lumped measure of the near-degenerate set
/// where alpha p is within tol of c - yd.
struct StrictComplementarityReport {
  NodalField multiplier;          // t in {0, alpha} per node
  double degenerate_measure = 0;  // lumped measure of |alpha p - (c - yd)| <= tol
};

inline StrictComplementarityReport strict_complementarity_diag(const ProblemSpec& prob,
                                                               const NodalField& p,
                                                               double tol = 1e-8) {
  if (prob.family != ProblemFamily::state) {
    throw std::invalid_argument("strict_complementarity_diag: state family only");
  }
  if (p.size() != prob.data.size()) {
    throw std::invalid_argument("strict_complementarity_diag: dual length mismatch");
  }
  StrictComplementarityReport rep;
  rep.multiplier = NodalField(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double gap = prob.alpha * p[j] - (prob.cbound - prob.data[j]);
    rep.multiplier[j] = gap > 0.0 ? 0.0 : prob.alpha;
    if (std::abs(gap) <= tol) rep.degenerate_measure += prob.mesh.lumped_weights[j];
  }
  return rep;
}

}  // namespace pdegm
