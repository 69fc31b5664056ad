#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace stealth {

// Sign-change interval used by all bracketed solvers.
struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;

  bool valid() const {
    return lo < hi && std::isfinite(f_lo) && std::isfinite(f_hi) &&
           ((f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0));
  }
};

struct NoSignChangeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SpanCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  double best;
  ConvergenceError(const std::string& msg, double best_iterate)
      : std::runtime_error(msg + " (best iterate " + std::to_string(best_iterate) + ")"),
        best(best_iterate) {}
};

// Brent's method on a validated bracket. Stops when |f(x)| <= tol or the
// bracket width falls below tol*max(1,|x|).
template <typename F>
double find_root(F&& f, Bracket br, double tol = 1e-12, int max_iter = 200) {
  if (!br.valid()) throw NoSignChangeError("find_root: bracket does not straddle a sign change");

  double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
  double c = a, fc = fa, d = b - a, e = d;

  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic / secant step
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw ConvergenceError("find_root: iteration cap reached", b);
}

// Doubles the interval away from `seed` in the given direction until f changes
// sign. A span cap stands in for genuinely unbounded brackets (z = -inf cases).
template <typename F>
Bracket expand_bracket(F&& f, double seed, int direction, double span_cap = 1e12) {
  if (direction == 0) throw std::invalid_argument("expand_bracket: direction must be +1 or -1");
  const double dir = direction > 0 ? 1.0 : -1.0;

  double x0 = seed;
  double f0 = f(x0);
  if (!std::isfinite(f0)) throw std::invalid_argument("expand_bracket: f not finite at seed");
  if (f0 == 0.0) {
    const double eps = std::max(std::abs(seed), 1.0) * 1e-14;
    return Bracket{seed - eps, seed + eps, f(seed - eps), f(seed + eps)};
  }

  double step = std::max(std::abs(seed), 1.0) * 0.5;
  while (true) {
    const double x1 = x0 + dir * step;
    if (std::abs(x1 - seed) > span_cap)
      throw SpanCapError("expand_bracket: no sign change within span cap");
    const double f1 = f(x1);
    if (std::isfinite(f1) && (f1 > 0.0) != (f0 > 0.0)) {
      if (x0 < x1) return Bracket{x0, x1, f0, f1};
      return Bracket{x1, x0, f1, f0};
    }
    if (std::isfinite(f1)) {
      x0 = x1;
      f0 = f1;
    }
    step *= 2.0;
  }
}

// Golden-section refinement of a maximum inside [lo, hi]; assumes unimodality.
template <typename F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double tol = 1e-10) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * (std::abs(x1) + std::abs(x2) + 1e-300)) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace stealth
