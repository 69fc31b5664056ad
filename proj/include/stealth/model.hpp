#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealth/special_functions.hpp"

namespace stealth {

struct AssumptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Size-modulated prosecution hazard lambda with population scaling
// lambda_N(z) = lambda(N^{-beta} z). theta/theta_prime/k_theta describe the
// small-argument power growth lambda(z) = k_theta |z|^theta (1+o(1)).
struct HazardModel {
  enum class Family { quadratic, absolute, power, erfc_detection, log_abs };

  Family family = Family::quadratic;
  double beta = 0.0;
  double theta = 2.0;
  double theta_prime = 1.0;
  double k_theta = 1.0;

  double k = 1.0;                                      // quadratic/absolute/log_abs scale
  double k_d = 0.0, theta_d = 1.0, y_bar = 1.0, sigma_det = 1.0;  // erfc detection

  static HazardModel quadratic_hazard(double K, double beta) {
    check_positive(K, "hazard K");
    HazardModel h;
    h.family = Family::quadratic;
    h.k = K;
    h.beta = beta;
    h.theta = 2.0;
    h.k_theta = K;
    return h;
  }

  static HazardModel absolute_hazard(double K, double beta) {
    check_positive(K, "hazard K");
    HazardModel h;
    h.family = Family::absolute;
    h.k = K;
    h.beta = beta;
    h.theta = 1.0;
    h.k_theta = K;
    return h;
  }

  static HazardModel power_hazard(double K_theta, double theta, double beta) {
    check_positive(K_theta, "hazard K_theta");
    if (!(theta >= 1.0)) throw std::invalid_argument("power hazard: theta must be >= 1");
    HazardModel h;
    h.family = Family::power;
    h.beta = beta;
    h.theta = theta;
    h.k_theta = K_theta;
    return h;
  }

  // Detection-triggered hazard built from an investigation probability
  // D(z) = min{K_D |z|^theta_D, 1} and an order-flow threshold y_bar; the
  // population scaling exponent is 1/2 by construction.
  static HazardModel erfc_detection_hazard(double K_D, double theta_D, double y_bar,
                                           double sigma) {
    check_positive(K_D, "detection K_D");
    check_positive(y_bar, "detection y_bar");
    check_positive(sigma, "detection sigma");
    if (!(theta_D >= 1.0)) throw std::invalid_argument("erfc hazard: theta_D must be >= 1");
    HazardModel h;
    h.family = Family::erfc_detection;
    h.beta = 0.5;
    h.k_d = K_D;
    h.theta_d = theta_D;
    h.y_bar = y_bar;
    h.sigma_det = sigma;
    h.theta = std::min(theta_D, 2.0);
    h.theta_prime = 1.0;
    // leading small-argument coefficient, estimated on the declared exponent
    const double eps = 1e-5 * sigma;
    h.k_theta = h.value(eps) / std::pow(eps, h.theta);
    return h;
  }

  // Concave log hazard used by the weak-deterrence counterexample; never
  // passes the convexity check.
  static HazardModel log_abs_hazard(double K, double beta) {
    check_positive(K, "hazard K");
    HazardModel h;
    h.family = Family::log_abs;
    h.k = K;
    h.beta = beta;
    h.theta = 1.0;
    h.k_theta = K;
    return h;
  }

  // lambda(u) for the size-modulated argument u.
  double value(double u) const {
    switch (family) {
      case Family::quadratic:
        return k * u * u;
      case Family::absolute:
        return k * std::abs(u);
      case Family::power:
        return k_theta * std::pow(std::abs(u), theta);
      case Family::log_abs:
        return k * std::log1p(std::abs(u));
      case Family::erfc_detection: {
        const double survival = detection_survival(u);
        if (survival > 0.0) return -std::log(survival);
        // D = 1 and the erfc difference underflowed: use the asymptotic
        // survival erfc(a)/2 ~ e^{-a^2}/(2 a sqrt(pi)), a = (|u|-y_bar)/(sqrt(2) sigma)
        const double a = (std::abs(u) - y_bar) / (std::sqrt(2.0) * sigma_det);
        if (!(a > 0.0) || detection_d(u) < 1.0)
          throw std::domain_error("erfc hazard: prosecution probability saturated");
        return a * a + std::log(2.0 * a * std::sqrt(3.141592653589793));
      }
    }
    return 0.0;
  }

  // lambda'(u); families with a kink at zero are queried away from it.
  double derivative(double u) const {
    const double s = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    switch (family) {
      case Family::quadratic:
        return 2.0 * k * u;
      case Family::absolute:
        return k * s;
      case Family::power:
        return u == 0.0 ? 0.0 : k_theta * theta * s * std::pow(std::abs(u), theta - 1.0);
      case Family::log_abs:
        return k * s / (1.0 + std::abs(u));
      case Family::erfc_detection: {
        const double survival = detection_survival(u);
        if (survival > 0.0) return detection_probability_derivative(u) / survival;
        const double a = (std::abs(u) - y_bar) / (std::sqrt(2.0) * sigma_det);
        if (!(a > 0.0) || detection_d(u) < 1.0)
          throw std::domain_error("erfc hazard: prosecution probability saturated");
        // derivative of the asymptotic branch
        return s * (2.0 * a + 1.0 / a) / (std::sqrt(2.0) * sigma_det);
      }
    }
    return 0.0;
  }

  // u * lambda'(u), continuous through u = 0 for every family.
  double u_dlambda(double u) const {
    if (u == 0.0) return 0.0;
    return u * derivative(u);
  }

 private:
  static void check_positive(double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  }

  double detection_d(double u) const {
    return std::min(k_d * std::pow(std::abs(u), theta_d), 1.0);
  }

  // 1 - D(u) (erfc((y_bar+u)/s) + erfc((y_bar-u)/s)) / 2, the no-prosecution
  // probability, arranged to avoid the 2 - tiny cancellation for large |u|
  double detection_survival(double u) const {
    const double s = std::sqrt(2.0) * sigma_det;
    const double d = detection_d(u);
    const double au = std::abs(u);
    if (d < 1.0) {
      const double sum = stealth::erfc((y_bar + au) / s) + stealth::erfc((y_bar - au) / s);
      return 1.0 - 0.5 * d * sum;
    }
    // with D = 1 the survival is (erfc((|u|-y_bar)/s) - erfc((|u|+y_bar)/s)) / 2
    return 0.5 * (stealth::erfc((au - y_bar) / s) - stealth::erfc((au + y_bar) / s));
  }

  double detection_probability_derivative(double u) const {
    const double s2 = sigma_det * sigma_det;
    const double g = std::sqrt(2.0 / 3.141592653589793) / sigma_det;
    const double sum_erfc = stealth::erfc((y_bar + u) / (std::sqrt(2.0) * sigma_det)) +
                            stealth::erfc((y_bar - u) / (std::sqrt(2.0) * sigma_det));
    const double d = detection_d(u);
    double dprime = 0.0;
    if (k_d * std::pow(std::abs(u), theta_d) < 1.0 && u != 0.0) {
      const double s = u > 0.0 ? 1.0 : -1.0;
      dprime = k_d * theta_d * s * std::pow(std::abs(u), theta_d - 1.0);
    }
    const double sprime =
        g * (std::exp(-(y_bar - u) * (y_bar - u) / (2.0 * s2)) -
             std::exp(-(y_bar + u) * (y_bar + u) / (2.0 * s2)));
    return 0.5 * (dprime * sum_erfc + d * sprime);
  }
};

// Penalty schedule: strategy-based component C0 plus the profit multiplier chi
// (chi = 1 is pure disgorgement). chi0 = chi - 1 is the part beyond it.
struct PenaltyModel {
  enum class Family { zero, linear, power, example3 };

  double chi = 1.0;
  Family family = Family::zero;
  double k_alpha = 0.0;
  double alpha = 1.0;
  double alpha_prime = 1.0;

  double chi0() const { return chi - 1.0; }

  static PenaltyModel civil(double chi) {
    check_chi(chi);
    PenaltyModel p;
    p.chi = chi;
    return p;
  }

  static PenaltyModel linear_penalty(double chi, double K_alpha) {
    check_chi(chi);
    if (!(K_alpha >= 0.0)) throw std::invalid_argument("penalty K_alpha must be >= 0");
    PenaltyModel p;
    p.chi = chi;
    p.family = K_alpha == 0.0 ? Family::zero : Family::linear;
    p.k_alpha = K_alpha;
    p.alpha = 1.0;
    return p;
  }

  static PenaltyModel power_penalty(double chi, double K_alpha, double alpha,
                                    double alpha_prime = 1.0) {
    check_chi(chi);
    if (!(K_alpha > 0.0)) throw std::invalid_argument("penalty K_alpha must be positive");
    if (!(alpha >= 1.0)) throw std::invalid_argument("penalty alpha must be >= 1");
    if (!(alpha_prime > 0.0)) throw std::invalid_argument("penalty alpha_prime must be positive");
    PenaltyModel p;
    p.chi = chi;
    p.family = Family::power;
    p.k_alpha = K_alpha;
    p.alpha = alpha;
    p.alpha_prime = alpha_prime;
    return p;
  }

  // Bounded piecewise penalty from the non-uniqueness counterexample.
  static PenaltyModel example3_penalty() {
    PenaltyModel p;
    p.chi = 1.0;
    p.family = Family::example3;
    p.alpha = 1.0;
    return p;
  }

  double c0(double z) const {
    switch (family) {
      case Family::zero:
        return 0.0;
      case Family::linear:
        return k_alpha * std::abs(z);
      case Family::power:
        return k_alpha * std::pow(std::abs(z), alpha);
      case Family::example3:
        if (z <= -6.0) return 1.0 / (4.0 * z) + 1.0 / 12.0;
        if (z <= 0.0) return -z / 144.0;
        if (z <= 1.2) return 25.0 * z / 144.0;
        return 5.0 / 12.0 - 1.0 / (4.0 * z);
    }
    return 0.0;
  }

  double c0_derivative(double z) const {
    const double s = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    switch (family) {
      case Family::zero:
        return 0.0;
      case Family::linear:
        return k_alpha * s;
      case Family::power:
        return z == 0.0 ? 0.0 : k_alpha * alpha * s * std::pow(std::abs(z), alpha - 1.0);
      case Family::example3:
        if (z <= -6.0) return -1.0 / (4.0 * z * z);
        if (z <= 0.0) return -1.0 / 144.0;
        if (z <= 1.2) return 25.0 / 144.0;
        return 1.0 / (4.0 * z * z);
    }
    return 0.0;
  }

  // Exponent driving the stealth index; only genuine power growth exceeds 1.
  double growth_alpha() const { return family == Family::power ? alpha : 1.0; }

  bool has_criminal_component() const { return family != Family::zero; }

 private:
  static void check_chi(double chi) {
    if (!(chi >= 1.0)) throw std::invalid_argument("penalty chi must be >= 1");
  }
};

// Insider order pair: sell in the low state, buy in the high state.
struct Strategy {
  double z0;  // Z(0) < 0
  double z1;  // Z(1) > 0

  void check() const {
    if (!(z0 < 0.0 && z1 > 0.0))
      throw std::invalid_argument("strategy must satisfy Z(0) < 0 < Z(1)");
  }
};

// Full market instance.
struct ModelParams {
  double p = 0.5;           // up-state probability
  double sigma = 1.0;       // liquidity trade std
  std::int64_t n_pop = 1;   // liquidity trader count
  HazardModel hazard;
  PenaltyModel penalty;

  double q() const { return (1.0 - p) / p; }

  void check() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (n_pop < 1) throw std::invalid_argument("n_pop must be >= 1");
  }
};

inline double population_scale(const HazardModel& h, std::int64_t n_pop) {
  return std::pow(static_cast<double>(n_pop), -h.beta);
}

// lambda_N(z) = lambda(N^{-beta} z)
inline double hazard_value(const HazardModel& h, std::int64_t n_pop, double z) {
  return h.value(population_scale(h, n_pop) * z);
}

// d lambda_N / dz = N^{-beta} lambda'(N^{-beta} z)
inline double hazard_derivative(const HazardModel& h, std::int64_t n_pop, double z) {
  const double s = population_scale(h, n_pop);
  return s * h.derivative(s * z);
}

// z * lambda_N'(z), continuous at z = 0.
inline double hazard_z_dlambda(const HazardModel& h, std::int64_t n_pop, double z) {
  return h.u_dlambda(population_scale(h, n_pop) * z);
}

// 1 - exp(-lambda_N(z))
inline double prosecution_probability(const HazardModel& h, std::int64_t n_pop, double z) {
  return -std::expm1(-hazard_value(h, n_pop, z));
}

// C0(z) + chi * max(profit, 0)
inline double penalty_total(const PenaltyModel& pen, double z, double profit) {
  return pen.c0(z) + pen.chi * std::max(profit, 0.0);
}

// Numerical validation of the standing assumptions on a model instance.
struct ValidationReport {
  struct Check {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Check> checks;
  double fitted_theta = std::numeric_limits<double>::quiet_NaN();
  double fitted_alpha = std::numeric_limits<double>::quiet_NaN();
  bool c0_bounded = false;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (!(ys[i] > 0.0) || !std::isfinite(ys[i])) continue;
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const double ratio = std::pow(10.0, 1.0 / per_decade);
  for (double x = lo; x <= hi * (1.0 + 1e-12); x *= ratio) g.push_back(x);
  return g;
}

// second divided difference f[x0,x1,x2]; nonnegative for convex f
inline double second_divided_difference(double x0, double f0, double x1, double f1, double x2,
                                        double f2) {
  return ((f2 - f1) / (x2 - x1) - (f1 - f0) / (x1 - x0)) / (x2 - x0);
}

}  // namespace detail

inline ValidationReport validate_assumptions(const ModelParams& params) {
  ValidationReport report;
  const HazardModel& h = params.hazard;
  const PenaltyModel& pen = params.penalty;
  const auto grid = detail::geometric_grid(1e-4, 1e4, 64);

  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, detail});
  };

  // lambda(0) = 0 and positivity away from zero
  {
    bool pass = h.value(0.0) == 0.0;
    for (double s : {-1.0, 1.0})
      for (double x : grid)
        if (!(h.value(s * x) > 0.0)) pass = false;
    add("hazard positivity", pass, "lambda(0)=0 and lambda>0 elsewhere");
  }

  // strict increase in |z|
  {
    bool pass = true;
    for (double s : {-1.0, 1.0}) {
      double prev = h.value(s * grid.front());
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = h.value(s * grid[i]);
        if (!(cur > prev)) pass = false;
        prev = cur;
      }
    }
    add("hazard monotonicity", pass, "lambda strictly increasing in |z|");
  }

  // derivative sign pattern
  {
    bool pass = true;
    for (double x : grid) {
      if (!(h.derivative(x) > 0.0)) pass = false;
      if (!(h.derivative(-x) < 0.0)) pass = false;
    }
    add("hazard derivative sign", pass, "lambda' < 0 on (-inf,0), > 0 on (0,inf)");
  }

  // convexity via second divided differences on both sign branches
  {
    double worst = 0.0;
    for (double s : {-1.0, 1.0}) {
      for (std::size_t i = 2; i < grid.size(); ++i) {
        const double x0 = s * grid[i - 2], x1 = s * grid[i - 1], x2 = s * grid[i];
        const double dd = detail::second_divided_difference(x0, h.value(x0), x1, h.value(x1), x2,
                                                            h.value(x2));
        worst = std::min(worst, dd);
      }
    }
    add("hazard convexity", worst >= -1e-9, "min second divided difference " + std::to_string(worst));
  }

  // small-argument exponent fit against declared theta
  {
    std::vector<double> xs, ys;
    for (double x : detail::geometric_grid(1e-4, 1e-2, 16)) {
      xs.push_back(x);
      ys.push_back(h.value(x));
    }
    report.fitted_theta = detail::loglog_slope(xs, ys);
    const bool pass = std::isfinite(report.fitted_theta) &&
                      std::abs(report.fitted_theta - h.theta) <= 0.05;
    add("hazard exponent fit", pass,
        "fitted theta " + std::to_string(report.fitted_theta) + " vs declared " +
            std::to_string(h.theta));
  }

  // C0(0) = 0 and monotone in |z| (weak)
  {
    bool pass = pen.c0(0.0) == 0.0;
    for (double s : {-1.0, 1.0}) {
      double prev = 0.0;
      for (double x : grid) {
        const double cur = pen.c0(s * x);
        if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev))) pass = false;
        prev = cur;
      }
    }
    add("penalty monotonicity", pass, "C0(0)=0 and C0 nondecreasing in |z|");
  }

  // C0 convexity, only binding when a criminal component is present
  if (pen.has_criminal_component()) {
    double worst = 0.0;
    for (double s : {-1.0, 1.0}) {
      for (std::size_t i = 2; i < grid.size(); ++i) {
        const double x0 = s * grid[i - 2], x1 = s * grid[i - 1], x2 = s * grid[i];
        const double dd = detail::second_divided_difference(x0, pen.c0(x0), x1, pen.c0(x1), x2,
                                                            pen.c0(x2));
        worst = std::min(worst, dd);
      }
    }
    add("penalty convexity", worst >= -1e-9, "min second divided difference " + std::to_string(worst));

    // large-argument growth: report boundedness, fit alpha when unbounded
    const double tail_ratio = pen.c0(1e4) / std::max(pen.c0(1e2), 1e-300);
    report.c0_bounded = tail_ratio < 2.0;
    if (!report.c0_bounded) {
      std::vector<double> xs, ys;
      for (double x : detail::geometric_grid(1e2, 1e4, 16)) {
        xs.push_back(x);
        ys.push_back(pen.c0(x));
      }
      report.fitted_alpha = detail::loglog_slope(xs, ys);
      const bool pass = std::isfinite(report.fitted_alpha) &&
                        std::abs(report.fitted_alpha - pen.growth_alpha()) <= 0.05;
      add("penalty exponent fit", pass,
          "fitted alpha " + std::to_string(report.fitted_alpha) + " vs declared " +
              std::to_string(pen.growth_alpha()));
    } else {
      // bounded C0 is reported, not failed
      add("penalty growth", true, "C0 bounded at large |z|");
    }
  }

  // chi0 >= 0
  add("penalty multiplier", pen.chi0() >= 0.0, "chi >= 1");

  return report;
}

}  // namespace stealth
