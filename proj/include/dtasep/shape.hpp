#pragma once

// Limit-shape and flux analytics.
//
//   tau_hom(x, y)  = (sqrt(x + y) + sqrt(y))^2 / r            homogeneous shape
//   tilde_tau(x, y) = tau_hom(x, y) - mu |x|                  disorder upper bound
//   h(t, x)        = inf{y >= 0 : tau(x, y) > t} = t k(x / t)
//   f(rho)         = inf_v [k(v) + v rho]
//
// Along the line y = 1 - x rho, g(x) = tilde_tau(x, 1 - x rho) has a kink at
// x = 0 with one-sided slopes (2 - 4 rho)/r +/- mu, so max_x g = g(0) = 4/r
// exactly when |rho - 1/2| <= mu r / 4. That is the plateau f = r/4.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "dtasep/env.hpp"
#include "dtasep/errors.hpp"
#include "dtasep/optimize.hpp"

namespace dtasep::shape {

struct ShapeModel {
  double r = 1.0;
  double mu = 0.0;
};

inline void validate(const ShapeModel& m) {
  if (!(m.r > 0.0) || !std::isfinite(m.r)) throw ParameterError("shape model r must be positive");
  if (!(m.mu >= 0.0)) throw ParameterError("shape model mu must be nonnegative");
  if (m.mu > 1.0 / m.r) throw ParameterError("shape model mu must not exceed 1/r");
}

inline ShapeModel model_from_law(const DisorderLaw& law) { return {essential_infimum(law), mu(law)}; }

enum class FluxSource { analytic, variational, simulation, lpp };

inline const char* to_string(FluxSource s) {
  switch (s) {
    case FluxSource::analytic: return "analytic";
    case FluxSource::variational: return "variational";
    case FluxSource::simulation: return "simulation";
    case FluxSource::lpp: return "lpp";
  }
  return "unknown";
}

struct FluxEstimate {
  double rho = 0.0;
  double value = 0.0;
  double sem = 0.0;
  FluxSource source = FluxSource::analytic;
};

inline bool in_wedge(double x, double y) noexcept { return y >= 0.0 && x + y >= 0.0; }

inline void require_wedge(double x, double y) {
  if (!in_wedge(x, y))
    throw DomainError("(" + std::to_string(x) + ", " + std::to_string(y) + ") is outside y >= 0, x + y >= 0");
}

inline double tau_hom(double r, double x, double y) {
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  require_wedge(x, y);
  const double s = std::sqrt(x + y) + std::sqrt(y);
  return s * s / r;
}

inline double tilde_tau(const ShapeModel& m, double x, double y) {
  return tau_hom(m.r, x, y) - m.mu * std::abs(x);
}

/// Homogeneous k(v) = h(1, v):
///   -v               for v <= -r   (wedge edge, y = -x)
///   (r - v)^2 / 4r   for -r <= v <= r
///   0                for v >= r    (tau(v, 0) = v/r already exceeds 1)
inline double k_hom(double r, double v) {
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  if (v <= -r) return -v;
  if (v >= r) return 0.0;
  return (r - v) * (r - v) / (4.0 * r);
}

inline FluxEstimate flux_hom(double r, double rho) { return {rho, r * rho * (1.0 - rho), 0.0, FluxSource::analytic}; }

struct HOptions {
  // Largest rate in the model; sets the bisection ceiling 4 t max_rate + |x|.
  double max_rate = 1.0;
  double tol = 1e-10;
};

/// h(t, x) = inf{y >= max(0, -x) : tau(x, y) > t} by bisection on the
/// admissible ray. `tau_eval(x, y)` must be continuous and nondecreasing in y.
template <class Tau>
double h_from_tau(Tau&& tau_eval, double t, double x, const HOptions& opt = {}) {
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  double lo = std::max(0.0, -x);
  if (tau_eval(x, lo) > t) return lo;
  double hi = 4.0 * t * opt.max_rate + std::abs(x);
  if (!(tau_eval(x, hi) > t))
    throw BracketError("tau(" + std::to_string(x) + ", y) stays <= " + std::to_string(t) + " up to y = " +
                       std::to_string(hi));
  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    if (tau_eval(x, mid) > t)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// k for the tilde_tau bound: k(v) = h(1, v) with tau = tilde_tau.
inline double k_tilde(const ShapeModel& m, double v) {
  return h_from_tau([&m](double x, double y) { return tilde_tau(m, x, y); }, 1.0, v, HOptions{m.r});
}

struct VariationalBracket {
  double lo = -3.0;
  double hi = 3.0;
  double tol = 1e-9;
};

// [-1/r - 1, 1/r + 1]; the homogeneous minimizer r(1 - 2 rho) sits well inside.
inline VariationalBracket default_bracket(double r) { return {-1.0 / r - 1.0, 1.0 / r + 1.0, 1e-9}; }

/// f(rho) = inf_v [k(v) + v rho] by golden-section search. k must be convex
/// on the bracket (checked at a few midpoints first). If the minimizer sits on
/// a bracket end while the objective is still decreasing into it, the bracket
/// is doubled once; a second hit is a BracketError.
template <class K>
FluxEstimate flux_from_k(K&& k_eval, double rho, VariationalBracket bracket) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("rho must lie in [0, 1]");
  auto phi = [&](double v) { return k_eval(v) + v * rho; };
  for (int attempt = 0; attempt < 2; ++attempt) {
    opt::require_midpoint_shape(phi, bracket.lo, bracket.hi, +1);
    const auto best = opt::golden_minimize(phi, bracket.lo, bracket.hi, bracket.tol);
    const double width = bracket.hi - bracket.lo;
    const double probe = 1e-3 * width;
    const bool stuck_lo = best.arg - bracket.lo <= 10 * bracket.tol && phi(bracket.lo + probe) > best.value;
    const bool stuck_hi = bracket.hi - best.arg <= 10 * bracket.tol && phi(bracket.hi - probe) > best.value;
    if (!stuck_lo && !stuck_hi) return {rho, best.value, 0.0, FluxSource::variational};
    const double c = 0.5 * (bracket.lo + bracket.hi);
    bracket.lo = c - width;
    bracket.hi = c + width;
  }
  throw BracketError("variational minimizer keeps hitting the bracket boundary at rho = " + std::to_string(rho));
}

// Admissible x for the line y = 1 - x rho: [-1/(1 - rho), 1/rho].
inline std::pair<double, double> g_domain(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  return {-1.0 / (1.0 - rho), 1.0 / rho};
}

inline double g_profile(const ShapeModel& m, double rho, double x) {
  double y = 1.0 - x * rho;
  // Snap rounding residue at the two ends of the domain back onto the wedge.
  constexpr double snap = 1e-12;
  if (y < 0.0 && y > -snap) y = 0.0;
  if (x + y < 0.0 && x + y > -snap) y = -x;
  require_wedge(x, y);
  return tilde_tau(m, x, y);
}

inline std::pair<double, double> plateau_interval(const ShapeModel& m) {
  validate(m);
  const double half = 0.25 * m.mu * m.r;
  return {0.5 - half, 0.5 + half};
}

struct PlateauVerdict {
  double rho = 0.0;
  double max_value = 0.0;
  double argmax = 0.0;
  double bound = 0.0;  // 4/r
  bool inside_open_interval = false;
  bool argmax_at_origin = false;
  bool pass = false;
};

inline constexpr double plateau_value_slack = 1e-9;
inline constexpr double plateau_argmax_slack = 1e-6;

/// Maximizes the concave g over its domain and compares with 4/r. Inside the
/// open plateau interval the maximizer must also be x = 0.
inline PlateauVerdict plateau_check(const ShapeModel& m, double rho) {
  validate(m);
  const auto [lo, hi] = g_domain(rho);
  auto g = [&](double x) { return g_profile(m, rho, x); };
  opt::require_midpoint_shape(g, lo, hi, -1);
  auto best = opt::golden_maximize(g, lo, hi, 1e-9);
  // The kink is the one point golden-section can only approach.
  if (const double g0 = g(0.0); g0 >= best.value) best = {0.0, g0};

  PlateauVerdict v;
  v.rho = rho;
  v.max_value = best.value;
  v.argmax = best.arg;
  v.bound = 4.0 / m.r;
  const auto [plo, phi] = plateau_interval(m);
  v.inside_open_interval = rho > plo && rho < phi;
  v.argmax_at_origin = std::abs(best.arg) <= plateau_argmax_slack;
  v.pass = v.max_value <= v.bound + plateau_value_slack && (!v.inside_open_interval || v.argmax_at_origin);
  return v;
}

}  // namespace dtasep::shape
