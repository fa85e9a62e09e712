/* Closed-form proximal mappings and Moreau-Yosida value functions for the
 * three model problems:
 *
 *   l1    data term (1/alpha)|t|, dual box [-1/alpha, 1/alpha]
 *   linf  data term ind_{[-delta,delta]}(t), dual delta |w|
 *   state data term (1/(2 alpha))(t - yd)^2 + ind_{(-inf,c]}(t)
 *
 * All maps act pointwise; the Moreau-Yosida parameter gamma adds gamma/2 w^2
 * to the conjugate integrand, which scales the prox input by 1/(1+sigma*gamma)
 * through the standard calculus rules.  A golden-section search on the prox
 * objective serves as the independent verification oracle.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "pdegm/fem1d.hpp"

namespace pdegm {

enum class ProblemFamily { l1, linf, state };

inline std::string to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::l1: return "l1";
    case ProblemFamily::linf: return "linf";
    case ProblemFamily::state: return "state";
  }
  return "?";
}

/// Scalar parameters of one pointwise data term.
struct ScalarProxSpec {
  ProblemFamily family = ProblemFamily::l1;
  double alpha = 1.0;  // data-term weight (> 0)
  double gamma = 0.0;  // Moreau-Yosida parameter (>= 0)
  double delta = 0.0;  // noise bound (> 0 for linf)
  double c = 0.0;      // state bound (state only)
  double yd = 0.0;     // pointwise desired-state value (state only)
};

inline void validate(const ScalarProxSpec& s) {
  if (!(s.alpha > 0.0)) throw std::invalid_argument("ScalarProxSpec: alpha must be positive");
  if (!(s.gamma >= 0.0)) throw std::invalid_argument("ScalarProxSpec: gamma must be nonnegative");
  if (s.family == ProblemFamily::linf && !(s.delta > 0.0)) {
    throw std::invalid_argument("ScalarProxSpec: linf family needs delta > 0");
  }
}

/// prox_{tau G} for G(u) = 1/2 ||u||^2: pointwise division by 1 + tau.
inline double prox_g(double u, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_g: tau must be positive");
  return u / (1.0 + tau);
}

inline ElementField prox_g(ElementField u, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_g: tau must be positive");
  const double scale = 1.0 / (1.0 + tau);
  for (auto& v : u) v *= scale;
  return u;
}

/// prox_{sigma F*_gamma} for the l1 family: clamp(v/(1+sigma gamma), +-1/alpha).
inline double prox_fstar_l1(double v, double sigma, double alpha, double gamma) {
  const double bound = 1.0 / alpha;
  const double w = v / (1.0 + sigma * gamma);
  return std::clamp(w, -bound, bound);
}

/// prox_{sigma F*_gamma} for the linf family: soft shrinkage by delta*sigma,
/// then scaling by 1/(1+sigma gamma).
inline double prox_fstar_linf(double v, double sigma, double delta, double gamma) {
  const double shrunk = std::abs(v) - delta * sigma;
  if (shrunk <= 0.0) return 0.0;
  return std::copysign(shrunk / (1.0 + sigma * gamma), v);
}

/// prox_{sigma F*_gamma} for the state family; the two branches meet
/// continuously at the threshold.
inline double prox_fstar_state(double v, double sigma, double alpha, double gamma, double c,
                               double yd) {
  const double threshold = (1.0 + sigma * gamma) / alpha * (c - yd) + sigma * c;
  if (v > threshold) return (v - sigma * c) / (1.0 + sigma * gamma);
  return (v - sigma * yd) / (1.0 + sigma * (alpha + gamma));
}

inline double prox_fstar(const ScalarProxSpec& s, double v, double sigma) {
  switch (s.family) {
    case ProblemFamily::l1: return prox_fstar_l1(v, sigma, s.alpha, s.gamma);
    case ProblemFamily::linf: return prox_fstar_linf(v, sigma, s.delta, s.gamma);
    case ProblemFamily::state: return prox_fstar_state(v, sigma, s.alpha, s.gamma, s.c, s.yd);
  }
  return 0.0;
}

/// Pointwise integrand of the Moreau-Yosida value F_gamma, with the state
/// family's desired-state value passed per evaluation point.  gamma = 0
/// returns the unregularized integrand, with +inf as the infeasibility
/// sentinel.
inline double fgamma_value(const ScalarProxSpec& s, double t, double yd) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (s.family) {
    case ProblemFamily::l1: {
      if (s.gamma == 0.0) return std::abs(t) / s.alpha;
      // Huber: quadratic below the breakpoint gamma/alpha, affine above;
      // the affine offset gamma/(2 alpha^2) makes the branches meet.
      if (std::abs(t) <= s.gamma / s.alpha) return t * t / (2.0 * s.gamma);
      return std::abs(t) / s.alpha - s.gamma / (2.0 * s.alpha * s.alpha);
    }
    case ProblemFamily::linf: {
      const double excess = std::abs(t) - s.delta;
      if (excess <= 0.0) return 0.0;
      if (s.gamma == 0.0) return inf;
      return excess * excess / (2.0 * s.gamma);
    }
    case ProblemFamily::state: {
      if (s.gamma == 0.0) {
        if (t > s.c) return inf;
        const double d = t - yd;
        return d * d / (2.0 * s.alpha);
      }
      // Constrained branch above (1 + gamma/alpha) c - (gamma/alpha) yd,
      // quadratic tracking below; continuous at the breakpoint.
      const double ratio = s.gamma / s.alpha;
      if (t > (1.0 + ratio) * s.c - ratio * yd) {
        const double dc = s.c - yd;
        const double dt = t - s.c;
        return dc * dc / (2.0 * s.alpha) + dt * dt / (2.0 * s.gamma);
      }
      const double d = t - yd;
      return d * d / (2.0 * (s.alpha + s.gamma));
    }
  }
  return 0.0;
}

inline double fgamma_value(const ScalarProxSpec& s, double t) { return fgamma_value(s, t, s.yd); }

/// Conjugate integrand f*_gamma(w) = f*(w) + gamma/2 w^2 (+inf outside the
/// l1 dual box).
inline double fstar_gamma_value(const ScalarProxSpec& s, double w) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double quad = 0.5 * s.gamma * w * w;
  switch (s.family) {
    case ProblemFamily::l1:
      if (std::abs(w) > 1.0 / s.alpha) return inf;
      return quad;
    case ProblemFamily::linf:
      return s.delta * std::abs(w) + quad;
    case ProblemFamily::state: {
      const double breakpoint = (s.c - s.yd) / s.alpha;
      if (w > breakpoint) {
        const double dc = s.c - s.yd;
        return s.c * w - dc * dc / (2.0 * s.alpha) + quad;
      }
      return 0.5 * s.alpha * w * w + w * s.yd + quad;
    }
  }
  return 0.0;
}

/// Derivative of f*_gamma where it is single-valued; nullopt at the l1 box
/// edges and the linf kink at zero.
inline std::optional<double> fstar_gamma_derivative(const ScalarProxSpec& s, double w) {
  switch (s.family) {
    case ProblemFamily::l1:
      if (std::abs(w) >= 1.0 / s.alpha) return std::nullopt;
      return s.gamma * w;
    case ProblemFamily::linf:
      if (w == 0.0) return std::nullopt;
      return s.delta * (w > 0.0 ? 1.0 : -1.0) + s.gamma * w;
    case ProblemFamily::state: {
      const double breakpoint = (s.c - s.yd) / s.alpha;
      if (w > breakpoint) return s.c + s.gamma * w;
      return s.alpha * w + s.yd + s.gamma * w;
    }
  }
  return std::nullopt;
}

namespace detail {

// f*_gamma(x1) - f*_gamma(x2) in factored form, so the rounding error scales
// with |x1 - x2| rather than with the magnitude of the values.  Both probes
// must lie in the domain.
inline double fstar_gamma_diff(const ScalarProxSpec& s, double x1, double x2) {
  double d = 0.5 * s.gamma * (x1 - x2) * (x1 + x2);
  switch (s.family) {
    case ProblemFamily::l1:
      return d;
    case ProblemFamily::linf:
      return d + s.delta * (std::abs(x1) - std::abs(x2));
    case ProblemFamily::state: {
      const double b = (s.c - s.yd) / s.alpha;
      const auto upper_diff = [&](double a1, double a2) { return s.c * (a1 - a2); };
      const auto lower_diff = [&](double a1, double a2) {
        return (a1 - a2) * (0.5 * s.alpha * (a1 + a2) + s.yd);
      };
      if (x1 > b && x2 > b) return d + upper_diff(x1, x2);
      if (x1 <= b && x2 <= b) return d + lower_diff(x1, x2);
      if (x1 > b) return d + upper_diff(x1, b) + lower_diff(b, x2);
      return d + lower_diff(x1, b) + upper_diff(b, x2);
    }
  }
  return d;
}

}  // namespace detail

/// Independent verification oracle: minimizes 1/2 (w - v)^2 + sigma f*_gamma(w)
/// by golden-section search.  Decisions compare objective differences in
/// factored form, which keeps them reliable down to the 1e-12 bracket width.
inline double prox_oracle(const ScalarProxSpec& s, double v, double sigma) {
  validate(s);
  if (!(sigma > 0.0)) throw std::invalid_argument("prox_oracle: sigma must be positive");

  double reach = 1.0 + std::abs(v);
  if (s.family != ProblemFamily::linf) reach += 1.0 / s.alpha;
  if (s.family == ProblemFamily::linf) reach += s.delta;
  if (s.family == ProblemFamily::state) reach += std::abs(s.c) + std::abs(s.yd);
  double radius = sigma * 10.0 * reach;
  // The minimizer always lies within this distance of v: the prox does not
  // expand about any minimizer of f*_gamma (anchor 0 for l1/linf; for the
  // state family both prox branches shift v by at most sigma(|c|+|yd|)).
  double safe = 2.0 * std::abs(v) + 1.0;
  if (s.family == ProblemFamily::state) safe += sigma * (std::abs(s.c) + std::abs(s.yd));
  radius = std::max(radius, safe);

  double lo = v - radius;
  double hi = v + radius;
  if (s.family == ProblemFamily::l1) {
    lo = std::max(lo, -1.0 / s.alpha);
    hi = std::min(hi, 1.0 / s.alpha);
  }

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  for (int it = 0; it < 500 && hi - lo > 1e-12; ++it) {
    const double quad = 0.5 * (x1 - x2) * ((x1 - v) + (x2 - v));
    const double diff = quad + sigma * detail::fstar_gamma_diff(s, x1, x2);
    if (diff <= 0.0) {
      hi = x2;
      x2 = x1;
      x1 = hi - invphi * (hi - lo);
    } else {
      lo = x1;
      x1 = x2;
      x2 = lo + invphi * (hi - lo);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace pdegm
