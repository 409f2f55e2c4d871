#pragma once

#include <cmath>
#include <string>

#include "dtasep/errors.hpp"

namespace dtasep::opt {

struct Extremum {
  double arg = 0.0;
  double value = 0.0;
};

inline constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

/// Golden-section search for the minimum of a unimodal f on [lo, hi],
/// stopping once the bracket is narrower than `tol`. No derivatives are
/// used, so kinks are fine.
template <class F>
Extremum golden_minimize(F&& f, double lo, double hi, double tol = 1e-9) {
  if (!(hi > lo)) throw ParameterError("golden-section bracket must satisfy lo < hi");
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // The endpoints themselves are never probed inside the loop.
  Extremum best = fc <= fd ? Extremum{c, fc} : Extremum{d, fd};
  for (double e : {lo, hi}) {
    if (std::abs(e - best.arg) <= tol) {
      const double fe = f(e);
      if (fe < best.value) best = {e, fe};
    }
  }
  return best;
}

template <class F>
Extremum golden_maximize(F&& f, double lo, double hi, double tol = 1e-9) {
  auto r = golden_minimize([&f](double v) { return -f(v); }, lo, hi, tol);
  return {r.arg, -r.value};
}

/// Midpoint test of convexity (sign = +1) or concavity (sign = -1) of f on
/// `samples` evenly spaced pairs across [lo, hi]. Throws InvariantViolation
/// on a violation larger than `slack`.
template <class F>
void require_midpoint_shape(F&& f, double lo, double hi, int sign, int samples = 8, double slack = 1e-9) {
  for (int a = 0; a <= samples; ++a) {
    for (int b = a + 2; b <= samples; b += 2) {
      const double xa = lo + (hi - lo) * a / samples;
      const double xb = lo + (hi - lo) * b / samples;
      const double mid = f(0.5 * (xa + xb));
      const double chord = 0.5 * (f(xa) + f(xb));
      if (sign * (mid - chord) > slack * (1.0 + std::abs(chord)))
        throw InvariantViolation(std::string(sign > 0 ? "convexity" : "concavity") +
                                 " check failed between " + std::to_string(xa) + " and " + std::to_string(xb));
    }
  }
}

}  // namespace dtasep::opt
