#pragma once

#include <cmath>
#include <stdexcept>

namespace stealth {

// Complementary Gauss error function. libm's erfc is correctly rounded to a
// few ulp over the range we use (|x| <= 10), well inside the 1e-12 relative
// budget the hazard-rate formulas need.
inline double erfc(double x) { return std::erfc(x); }

// Principal branch of the Lambert W function, w*e^w = x for x >= -1/e.
// Series guess near the branch point, log(1+x) guess elsewhere, then Halley.
inline double lambert_w0(double x) {
  constexpr double inv_e = 0.36787944117144233;
  if (!(x >= -inv_e)) {
    if (x < -inv_e && x > -inv_e - 1e-15) x = -inv_e;  // fp slack at the branch point
    else throw std::domain_error("lambert_w0: argument below -1/e");
  }
  if (x == 0.0) return 0.0;

  double w;
  const double p2 = 2.0 * (1.0 + std::exp(1.0) * x);
  if (p2 <= 0.0) return -1.0;
  if (p2 < 1.0) {
    // branch-point expansion in p = sqrt(2(1+e*x))
    const double p = std::sqrt(p2);
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  } else if (x > std::exp(1.0)) {
    const double l = std::log(x);
    w = l - std::log(l);
  } else {
    w = std::log1p(x);
  }

  for (int i = 0; i < 32; ++i) {
    const double ew = std::exp(w);
    const double r = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * r / (2.0 * w + 2.0);
    const double dw = r / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

}  // namespace stealth
