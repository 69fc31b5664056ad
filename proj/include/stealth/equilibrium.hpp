#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stealth/market.hpp"
#include "stealth/model.hpp"
#include "stealth/quadrature.hpp"
#include "stealth/root_finding.hpp"
#include "stealth/special_functions.hpp"

namespace stealth {

struct BracketingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// gamma = min{beta*theta/(theta+alpha-1), 1/2}; alpha = 1 recovers min{beta, 1/2}.
inline double stealth_index(double beta, double theta, double alpha) {
  if (!(beta >= 0.0)) throw std::invalid_argument("stealth_index: beta must be >= 0");
  if (!(theta >= 1.0)) throw std::invalid_argument("stealth_index: theta must be >= 1");
  if (!(alpha >= 1.0)) throw std::invalid_argument("stealth_index: alpha must be >= 1");
  return std::min(beta * theta / (theta + alpha - 1.0), 0.5);
}

inline double stealth_index(const ModelParams& params) {
  return stealth_index(params.hazard.beta, params.hazard.theta, params.penalty.growth_alpha());
}

struct SolverOptions {
  double outer_tol = 1e-10;         // residual target on the buy-side condition
  double inner_tol_factor = 1e-12;  // x-tolerance factor (times sigma * N^gamma)
  int max_iter = 200;
  int scan_points = 400;
  double scan_lo_factor = 1e-4;  // scan window [lo, hi] * sigma * N^gamma
  double scan_hi_factor = 1e3;
  int quadrature_nodes = 201;
  double span_cap = 1e12;
  bool validate = true;
};

struct EquilibriumSolution {
  Strategy strategy;
  double zeta_star;
  double residual_f0;
  double residual_g1;
  PriceParams price_params;
  std::int64_t n_pop;
  std::vector<std::pair<double, Strategy>> all_roots;
};

struct LimitingSolution {
  enum class Method { closed_form_lambert, root_find, power_closed_form, finite_n1_delegate };

  Strategy strategy_scaled;
  double gamma;
  double price_constant;  // = p when gamma < 1/2, NaN when the N=1 delegate applies
  Method method;
  bool multiple_roots_warning = false;
  double residual0 = 0.0;
  double residual1 = 0.0;
};

struct ConvergenceReport {
  struct Row {
    std::int64_t n;
    Strategy scaled;      // N^{-gamma} Z*_N
    double err0;
    double err1;
    double bound_exponent;
  };
  std::vector<Row> rows;
  std::pair<double, double> fitted_slope;
  std::vector<std::pair<std::int64_t, double>> epsilon_rows;
  Strategy limit_strategy;
  double gamma;
  std::vector<std::pair<std::int64_t, std::string>> errors;  // failed solves, by N
};

struct GridSpec {
  int points = 400;
  double lo_factor = 1e-4;  // grid floor relative to the natural scale
  double hi_factor = 20.0;  // grid cap relative to the natural scale
  int y_points = 81;
  double y_max = 4.0;
};

namespace detail {

// Plain bisection with a secant nudge; keeps the sign-change invariant and
// stops only once the width and the residual are both inside tolerance.
template <typename F>
double bisect_refine(F&& f, double lo, double hi, double f_lo, double f_hi, double x_tol,
                     double f_tol, int max_iter = 200) {
  double best_x = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  double best_f = std::abs(f_lo) < std::abs(f_hi) ? f_lo : f_hi;
  for (int i = 0; i < max_iter; ++i) {
    double mid = 0.5 * (lo + hi);
    if ((i & 3) == 3 && f_hi != f_lo) {
      // occasional secant step, clipped to the interior
      const double sec = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
    }
    const double fm = f(mid);
    if (std::isfinite(fm) && std::abs(fm) < std::abs(best_f)) {
      best_f = fm;
      best_x = mid;
    }
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
    if (hi - lo <= x_tol && std::abs(best_f) <= f_tol) break;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * (std::abs(lo) + std::abs(hi))) break;
  }
  return best_x;
}

inline std::vector<double> geometric_points(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
  return g;
}

inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                               std::size_t skip_front) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = skip_front; i < xs.size(); ++i) {
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

// Zeros of the size-modulated g_{1,1} on each side of the origin; the finite-N
// zeros follow exactly from g_{1,N}(z) = g_{1,1}(N^{-beta} z).
struct GOneZeros {
  double negative;  // z_diamond at N = 1
  double positive;  // z_hat at N = 1
};

inline GOneZeros g1_unit_zeros(const ModelParams& params, const SolverOptions& opts) {
  ModelParams unit = params;
  unit.n_pop = 1;
  auto g = [&](double z) { return g1(unit, z); };
  const double seed = 1e-6 * params.sigma;
  GOneZeros zeros{};
  try {
    Bracket bn = expand_bracket(g, -seed, -1, opts.span_cap * params.sigma);
    zeros.negative = find_root(g, bn, 1e-14, opts.max_iter);
    Bracket bp = expand_bracket(g, seed, +1, opts.span_cap * params.sigma);
    zeros.positive = find_root(g, bp, 1e-14, opts.max_iter);
  } catch (const SpanCapError&) {
    throw BracketingError("solve_finite: g1 has no reachable zero (weak deterrence regime)");
  }
  return zeros;
}

}  // namespace detail

// Finite-population equilibrium by nested root finding: an inner sell-side
// zero z0(zeta) on (z_diamond, 0) for each strategy offset zeta, then an outer
// sign change of the buy-side condition G1 beyond the largest zero of
// z1(zeta) = zeta + z0(zeta).
inline EquilibriumSolution solve_finite(const ModelParams& params, const SolverOptions& opts = {}) {
  params.check();
  if (opts.validate) {
    const ValidationReport report = validate_assumptions(params);
    if (!report.passed()) {
      std::string what = "solve_finite: model violates standing assumptions:";
      for (const auto& c : report.checks)
        if (!c.pass) what += " [" + c.name + "]";
      throw AssumptionError(what);
    }
  }

  const QuadratureRule owned_rule =
      opts.quadrature_nodes == 201 ? QuadratureRule{} : gauss_hermite_rule(opts.quadrature_nodes);
  const QuadratureRule& rule = opts.quadrature_nodes == 201 ? default_rule() : owned_rule;

  const double gamma = stealth_index(params);
  const double n = static_cast<double>(params.n_pop);
  const double scale = params.sigma * std::pow(n, gamma);
  const double inner_x_tol = opts.inner_tol_factor * scale;

  const detail::GOneZeros unit_zeros = detail::g1_unit_zeros(params, opts);
  const double pop_stretch = std::pow(n, params.hazard.beta);
  const double z_diamond = pop_stretch * unit_zeros.negative;
  const double z_hat = pop_stretch * unit_zeros.positive;

  // sell-side zero for a fixed offset; PhiBar/PhiBar' enter only as constants
  auto inner_zero = [&](double zeta) {
    const PhiPair bar = phi_bar(params, zeta, rule);
    auto f = [&](double z) { return f0_given(params, bar, z); };
    double lo = z_diamond;
    double f_lo = f(lo);
    for (int k = 0; k < 8 && !(f_lo > 0.0); ++k) {
      lo *= 1.0 + 1e-9;  // nudge past the rounding of z_diamond itself
      f_lo = f(lo);
    }
    // in the deep scan tail PhiBar underflows and the penalty term A_N can
    // dominate arbitrarily close to zero; shrink the endpoint with it
    double hi = -1e-250;
    double f_hi = f(hi);
    for (int k = 0; k < 6 && !(f_hi < 0.0); ++k) {
      hi *= 1e-8;
      f_hi = f(hi);
    }
    if (!(f_hi < 0.0)) return hi;  // the zero sits below fp resolution of 0-
    if (!(f_lo > 0.0))
      throw BracketingError("solve_finite: inner bracket lost its sign change");
    return detail::bisect_refine(f, lo, hi, f_lo, f_hi, inner_x_tol, opts.outer_tol,
                                 opts.max_iter);
  };

  auto z1_of = [&](double zeta) { return zeta + inner_zero(zeta); };

  auto g1_cond = [&](double zeta) {
    return g1_condition_given(params, phi_hat(params, zeta, rule), z1_of(zeta));
  };

  // scan window scaled to the equilibrium's own N^gamma size
  const double scan_lo = opts.scan_lo_factor * scale;
  const double scan_hi = opts.scan_hi_factor * scale;
  std::vector<double> grid = detail::geometric_points(scan_lo, scan_hi, opts.scan_points);

  // zeta_breve: largest zero of z1
  std::vector<double> z1_vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) z1_vals[i] = z1_of(grid[i]);

  std::ptrdiff_t last_neg = -1;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (z1_vals[i] <= 0.0 && z1_vals[i + 1] > 0.0) last_neg = static_cast<std::ptrdiff_t>(i);

  double breve_lo, breve_hi, breve_flo, breve_fhi;
  if (last_neg >= 0) {
    breve_lo = grid[last_neg];
    breve_hi = grid[last_neg + 1];
    breve_flo = z1_vals[last_neg];
    breve_fhi = z1_vals[last_neg + 1];
  } else if (z1_vals.front() > 0.0) {
    // window floor is already past zeta_breve; walk down until z1 < 0
    double hi_pt = grid.front(), lo_pt = hi_pt, f_lo = z1_vals.front();
    bool found = false;
    for (int k = 0; k < 600; ++k) {
      lo_pt *= 0.5;
      f_lo = z1_of(lo_pt);
      if (f_lo <= 0.0) {
        found = true;
        break;
      }
      hi_pt = lo_pt;
    }
    if (!found) throw BracketingError("solve_finite: no zeta_breve below the scan window");
    breve_lo = lo_pt;
    breve_hi = hi_pt;
    breve_flo = f_lo;
    breve_fhi = z1_of(hi_pt);
  } else {
    std::ostringstream trace;
    trace << "solve_finite: z1(zeta) never turns positive on the scan window; tail z1 = "
          << z1_vals.back();
    throw BracketingError(trace.str());
  }
  const double zeta_breve = detail::bisect_refine([&](double zeta) { return z1_of(zeta); },
                                                  breve_lo, breve_hi, breve_flo, breve_fhi,
                                                  inner_x_tol, opts.outer_tol, opts.max_iter);

  // collect every sign change of G1 beyond zeta_breve on the scan grid
  std::vector<std::pair<double, double>> g_samples;  // (zeta, G1)
  {
    const double first = zeta_breve * (1.0 + 1e-9);
    g_samples.emplace_back(first, g1_cond(first));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] <= first) continue;
      const double g = g1_cond(grid[i]);
      if (std::isfinite(g)) g_samples.emplace_back(grid[i], g);
    }
  }

  std::vector<std::pair<double, Strategy>> roots;
  for (std::size_t i = 0; i + 1 < g_samples.size(); ++i) {
    const auto [za, ga] = g_samples[i];
    const auto [zb, gb] = g_samples[i + 1];
    if ((ga > 0.0) == (gb > 0.0)) continue;
    const double zeta = detail::bisect_refine(g1_cond, za, zb, ga, gb, inner_x_tol,
                                              opts.outer_tol, opts.max_iter);
    const double z0 = inner_zero(zeta);
    const Strategy cand{z0, zeta + z0};
    // an equilibrium maximizer beats abstaining on both branches; critical
    // points in the heavily penalized far tail have negative value and are
    // not best responses
    if (!(objective(params, cand, cand.z0, 0, rule).objective > 0.0) ||
        !(objective(params, cand, cand.z1, 1, rule).objective > 0.0))
      continue;
    roots.emplace_back(zeta, cand);
  }

  if (roots.empty()) {
    // the proof's anchor: G1 < 0 once z1 reaches the positive zero of g1
    auto z1_gap = [&](double zeta) { return z1_of(zeta) - z_hat; };
    double hi_pt = zeta_breve * 2.0;
    double f_hi = z1_gap(hi_pt);
    int guard = 0;
    while (f_hi < 0.0 && ++guard < 200) {
      hi_pt *= 2.0;
      f_hi = z1_gap(hi_pt);
    }
    if (f_hi >= 0.0) {
      const double zeta_hat = detail::bisect_refine(z1_gap, zeta_breve, hi_pt, z1_gap(zeta_breve),
                                                    f_hi, inner_x_tol, opts.outer_tol,
                                                    opts.max_iter);
      const double g_lo = g_samples.front().second;
      const double g_hi = g1_cond(zeta_hat);
      if ((g_lo > 0.0) != (g_hi > 0.0)) {
        const double zeta = detail::bisect_refine(g1_cond, g_samples.front().first, zeta_hat, g_lo,
                                                  g_hi, inner_x_tol, opts.outer_tol, opts.max_iter);
        const double z0 = inner_zero(zeta);
        roots.emplace_back(zeta, Strategy{z0, zeta + z0});
      }
    }
  }

  if (roots.empty()) {
    std::ostringstream trace;
    trace << "solve_finite: no sign change of G1 beyond zeta_breve=" << zeta_breve << "; samples:";
    for (std::size_t i = 0; i < g_samples.size(); i += std::max<std::size_t>(1, g_samples.size() / 8))
      trace << " (" << g_samples[i].first << ", " << g_samples[i].second << ")";
    throw BracketingError(trace.str());
  }

  // canonical root: largest total objective across both asset states
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const Strategy& s = roots[i].second;
    const double value = objective(params, s, s.z0, 0, rule).objective +
                         objective(params, s, s.z1, 1, rule).objective;
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }

  EquilibriumSolution sol{};
  sol.strategy = roots[best].second;
  sol.zeta_star = roots[best].first;
  sol.residual_f0 = f0(params, sol.zeta_star, sol.strategy.z0, rule);
  sol.residual_g1 = g1_condition(params, sol.zeta_star, sol.strategy.z0, rule);
  sol.price_params = price_params(params, sol.strategy);
  sol.n_pop = params.n_pop;
  sol.all_roots = std::move(roots);
  return sol;
}

// Scaled objective of the large-population limit at constant price p, valid on
// the gamma = beta branch. With beta > 0 only the linear asymptote of C0
// survives the scaling; at beta = 0 the full penalty shape does.
inline double limiting_objective(const ModelParams& params, double z, int v) {
  const double chi = params.penalty.chi, chi0 = params.penalty.chi0();
  const double lam = params.hazard.value(z);
  const double surv = std::exp(-lam);
  double c0 = 0.0;
  if (params.penalty.has_criminal_component())
    c0 = params.hazard.beta == 0.0 ? params.penalty.c0(z)
                                   : params.penalty.k_alpha * std::abs(z);
  return (static_cast<double>(v) - params.p) * z * (chi * surv - chi0) - (1.0 - surv) * c0;
}

// First-order condition of limiting_objective (the survival-weighted form).
inline double limiting_foc(const ModelParams& params, double z, int v) {
  const double chi = params.penalty.chi, chi0 = params.penalty.chi0();
  const double lam = params.hazard.value(z);
  double a1 = 0.0;
  if (params.penalty.has_criminal_component()) {
    const double s = z > 0.0 ? 1.0 : -1.0;
    const double c0 = params.hazard.beta == 0.0 ? params.penalty.c0(z)
                                                : params.penalty.k_alpha * std::abs(z);
    const double c0p = params.hazard.beta == 0.0 ? params.penalty.c0_derivative(z)
                                                 : params.penalty.k_alpha * s;
    a1 = -params.hazard.derivative(z) * c0 - std::expm1(std::min(lam, 700.0)) * c0p;
  }
  return (static_cast<double>(v) - params.p) *
             (chi - chi * params.hazard.u_dlambda(z) - chi0 * std::exp(std::min(lam, 700.0))) +
         a1;
}

// Power-regime scaled objective (gamma strictly below beta): profit is linear,
// the surviving penalty term grows like |z|^{theta+alpha}.
inline double limiting_power_objective(const ModelParams& params, double z, int v) {
  const double kk = params.hazard.k_theta * params.penalty.k_alpha;
  return (static_cast<double>(v) - params.p) * z -
         kk * std::pow(std::abs(z), params.hazard.theta + params.penalty.alpha);
}

namespace detail {

// N = 1 solver for the gamma = 1/2 regime where the hazard drops out of the
// scaled objective; optionally keeps a residual power-penalty term.
inline LimitingSolution solve_half_regime(const ModelParams& params, const SolverOptions& opts,
                                          double power_coeff, double power_exp) {
  ModelParams unit = params;
  unit.n_pop = 1;
  const QuadratureRule& rule = default_rule();

  auto pen_term = [&](double z) {
    return power_coeff == 0.0 ? 0.0 : power_coeff * std::pow(std::abs(z), power_exp);
  };

  auto inner = [&](double zeta) {
    const PhiPair bar = phi_bar(unit, zeta, rule);
    if (power_coeff == 0.0) return -bar.value / bar.derivative;
    auto f = [&](double z) { return -bar.value - z * bar.derivative + pen_term(z); };
    const double seed = -1e-6 * params.sigma;
    const double f_seed = f(seed);
    if (f_seed > 0.0) {
      // far scan tail: the expected-price terms underflow and the penalty
      // term dominates at the seed, pinning the zero just below 0
      double hi = -1e-250;
      double f_hi = f(hi);
      for (int k = 0; k < 6 && !(f_hi < 0.0); ++k) {
        hi *= 1e-8;
        f_hi = f(hi);
      }
      if (!(f_hi < 0.0)) return hi;
      return detail::bisect_refine(f, seed, hi, f_seed, f_hi, 1e-16 * params.sigma,
                                   opts.outer_tol, opts.max_iter);
    }
    const Bracket br = expand_bracket(f, seed, -1, opts.span_cap * params.sigma);
    return find_root(f, br, 1e-13, opts.max_iter);
  };

  auto g_cond = [&](double zeta) {
    const PhiPair hat = phi_hat(unit, zeta, rule);
    const double z1 = zeta + inner(zeta);
    return (1.0 - hat.value) - z1 * hat.derivative - pen_term(z1);
  };

  auto z1_of = [&](double zeta) { return zeta + inner(zeta); };

  const auto grid = geometric_points(1e-4 * params.sigma, 1e3 * params.sigma, opts.scan_points);
  std::ptrdiff_t last_neg = -1;
  std::vector<double> z1v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) z1v[i] = z1_of(grid[i]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (z1v[i] <= 0.0 && z1v[i + 1] > 0.0) last_neg = static_cast<std::ptrdiff_t>(i);
  if (last_neg < 0) throw BracketingError("limiting solve: no zeta_breve for the N=1 reduction");
  const double zeta_breve =
      bisect_refine(z1_of, grid[last_neg], grid[last_neg + 1], z1v[last_neg], z1v[last_neg + 1],
                    1e-13 * params.sigma, opts.outer_tol, opts.max_iter);

  double lo = zeta_breve * (1.0 + 1e-9);
  double g_lo = g_cond(lo);
  double hi = lo, g_hi = g_lo;
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= lo) continue;
    const double g = g_cond(grid[i]);
    if (std::isfinite(g) && (g > 0.0) != (g_lo > 0.0)) {
      hi = grid[i];
      g_hi = g;
      found = true;
      break;
    }
    lo = grid[i];
    g_lo = g;
  }
  if (!found) throw BracketingError("limiting solve: no G1 sign change in the N=1 reduction");
  const double zeta = bisect_refine(g_cond, lo, hi, g_lo, g_hi, 1e-13 * params.sigma,
                                    opts.outer_tol, opts.max_iter);

  LimitingSolution sol{};
  const double z0 = inner(zeta);
  sol.strategy_scaled = Strategy{z0, zeta + z0};
  sol.gamma = 0.5;
  sol.price_constant = std::numeric_limits<double>::quiet_NaN();
  sol.method = LimitingSolution::Method::finite_n1_delegate;
  sol.residual0 = -phi_bar(unit, zeta, rule).value - z0 * phi_bar(unit, zeta, rule).derivative +
                  pen_term(z0);
  sol.residual1 = g_cond(zeta);
  return sol;
}

}  // namespace detail

// Unique limiting equilibrium for gamma < 1/2 (closed forms where available,
// otherwise decoupled 1-D root finds); gamma = 1/2 delegates to the N = 1
// problem.
inline LimitingSolution solve_limiting(const ModelParams& params, const SolverOptions& opts = {}) {
  params.check();
  const HazardModel& h = params.hazard;
  const PenaltyModel& pen = params.penalty;
  const double alpha = pen.growth_alpha();
  const double gamma_arg = h.beta * h.theta / (h.theta + alpha - 1.0);
  const double gamma = std::min(gamma_arg, 0.5);

  if (gamma >= 0.5) {
    if (std::abs(h.beta - 0.5) < 1e-12 && std::abs(gamma_arg - 0.5) < 1e-12) {
      // hazard survives unmodified; this is the finite problem at N = 1
      ModelParams unit = params;
      unit.n_pop = 1;
      const EquilibriumSolution eq = solve_finite(unit, opts);
      LimitingSolution sol{};
      sol.strategy_scaled = eq.strategy;
      sol.gamma = 0.5;
      sol.price_constant = std::numeric_limits<double>::quiet_NaN();
      sol.method = LimitingSolution::Method::finite_n1_delegate;
      sol.residual0 = eq.residual_f0;
      sol.residual1 = eq.residual_g1;
      return sol;
    }
    if (std::abs(gamma_arg - 0.5) < 1e-12) {
      // borderline power case: hazard vanishes but a power penalty term stays
      const double coeff = h.k_theta * pen.k_alpha * (h.theta + alpha);
      return detail::solve_half_regime(params, opts, coeff, h.theta + alpha - 1.0);
    }
    // pure-profit reduction: both hazard and penalty scale away
    return detail::solve_half_regime(params, opts, 0.0, 0.0);
  }

  LimitingSolution sol{};
  sol.gamma = gamma;
  sol.price_constant = params.p;

  const bool civil = !pen.has_criminal_component();
  const bool quadratic_hazard =
      h.family == HazardModel::Family::quadratic ||
      (h.family == HazardModel::Family::power && h.theta == 2.0);

  if (civil && quadratic_hazard) {
    // lambda = K z^2: strategy is +-sqrt((1/2 - W0(sqrt(e) chi0 / (2 chi))) / K)
    const double K = h.family == HazardModel::Family::quadratic ? h.k : h.k_theta;
    const double w = lambert_w0(std::sqrt(std::exp(1.0)) * pen.chi0() / (2.0 * pen.chi));
    const double z1 = std::sqrt((0.5 - w) / K);
    sol.strategy_scaled = Strategy{-z1, z1};
    sol.method = LimitingSolution::Method::closed_form_lambert;
    sol.residual0 = limiting_foc(params, -z1, 0);
    sol.residual1 = limiting_foc(params, z1, 1);
    return sol;
  }

  if (alpha == 1.0 || h.beta == 0.0) {
    // gamma = beta: decoupled root finds of the survival-weighted condition
    sol.method = LimitingSolution::Method::root_find;
    double z_opt[2];
    for (int v = 0; v <= 1; ++v) {
      const double dir = v == 0 ? -1.0 : 1.0;
      auto f = [&](double z) { return limiting_foc(params, z, v); };

      // multiplicity scan (weak-deterrence configurations have plateaus)
      const auto mags = detail::geometric_points(1e-6 * params.sigma, 1e6 * params.sigma, 300);
      int sign_changes = 0;
      double prev = f(dir * mags.front());
      std::vector<std::pair<double, double>> change_brackets;
      for (std::size_t i = 1; i < mags.size(); ++i) {
        const double cur = f(dir * mags[i]);
        if (std::isfinite(cur) && std::isfinite(prev) && (cur > 0.0) != (prev > 0.0)) {
          ++sign_changes;
          change_brackets.emplace_back(dir * mags[i - 1], dir * mags[i]);
        }
        prev = cur;
      }
      if (sign_changes > 1) sol.multiple_roots_warning = true;
      if (change_brackets.empty())
        throw BracketingError("solve_limiting: first-order condition has no sign change");

      double best_z = 0.0, best_val = -std::numeric_limits<double>::infinity();
      for (auto [a, b] : change_brackets) {
        const double lo = std::min(a, b), hi = std::max(a, b);
        const double z = detail::bisect_refine(f, lo, hi, f(lo), f(hi), 1e-14 * params.sigma,
                                               opts.outer_tol, opts.max_iter);
        const double val = limiting_objective(params, z, v);
        if (val > best_val) {
          best_val = val;
          best_z = z;
        }
      }
      z_opt[v] = best_z;
    }
    sol.strategy_scaled = Strategy{z_opt[0], z_opt[1]};
    sol.residual0 = limiting_foc(params, z_opt[0], 0);
    sol.residual1 = limiting_foc(params, z_opt[1], 1);
    return sol;
  }

  // gamma < beta: only the power tails survive, argmax is explicit
  sol.method = LimitingSolution::Method::power_closed_form;
  const double kk = h.k_theta * pen.k_alpha * (h.theta + alpha);
  const double expo = 1.0 / (h.theta + alpha - 1.0);
  const double z1 = std::pow((1.0 - params.p) / kk, expo);
  const double z0 = -std::pow(params.p / kk, expo);
  sol.strategy_scaled = Strategy{z0, z1};
  sol.residual0 = 0.0;
  sol.residual1 = 0.0;
  return sol;
}

// Grid argmax of the insider's objective against a fixed target strategy,
// refined by golden section inside the winning cell (test oracle).
inline double brute_force_best_response(const ModelParams& params, const Strategy& strat, int v,
                                        const GridSpec& grid = {}) {
  const QuadratureRule& rule = default_rule();
  const double gamma = stealth_index(params);
  const double scale = params.sigma * std::pow(static_cast<double>(params.n_pop), gamma);

  double cap = grid.hi_factor * scale;
  SolverOptions opts;
  try {
    const detail::GOneZeros zeros = detail::g1_unit_zeros(params, opts);
    const double stretch = std::pow(static_cast<double>(params.n_pop), params.hazard.beta);
    // optima against arbitrary targets live in the wider profitable region
    // (z_deg, 0), so leave headroom beyond the g1 zeros
    cap = 4.0 * std::max(std::abs(zeros.negative), std::abs(zeros.positive)) * stretch;
  } catch (const BracketingError&) {
    // no g1 zero in reach: fall back to the grid's own cap
  }

  const double dir = v == 0 ? -1.0 : 1.0;
  const auto mags = detail::geometric_points(grid.lo_factor * scale, cap, grid.points);
  double best_z = dir * mags.front();
  double best_val = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    const double z = dir * mags[i];
    const double val = objective(params, strat, z, v, rule).objective;
    if (val > best_val) {
      best_val = val;
      best_z = z;
      best_i = i;
    }
  }
  const double lo_mag = mags[best_i == 0 ? 0 : best_i - 1];
  const double hi_mag = mags[std::min(best_i + 1, mags.size() - 1)];
  auto f = [&](double m) { return objective(params, strat, dir * m, v, rule).objective; };
  const auto [m_star, val] = golden_section_max(f, lo_mag, hi_mag, 1e-12);
  return val > best_val ? dir * m_star : best_z;
}

// epsilon-equilibrium certificate: best-response gap at the candidate price
// plus the worst rational-pricing deviation over scaled order flows.
inline double certify_epsilon_equilibrium(const ModelParams& params, const Strategy& scaled,
                                          std::optional<double> price_const,
                                          const GridSpec& grid = {}) {
  const QuadratureRule& rule = default_rule();
  const double gamma = stealth_index(params);
  if (!(gamma < 0.5))
    throw std::invalid_argument("certify_epsilon_equilibrium: requires gamma < 1/2");
  const double n = static_cast<double>(params.n_pop);
  const double ng = std::pow(n, gamma);
  const Strategy unscaled{scaled.z0 * ng, scaled.z1 * ng};

  auto j_flat = [&](double z, int v) {
    // objective against a constant price
    const double pc = *price_const;
    const double profit = (static_cast<double>(v) - pc) * z;
    const double surv = std::exp(-hazard_value(params.hazard, params.n_pop, z));
    return surv * profit -
           (1.0 - surv) * (params.penalty.c0(z) + params.penalty.chi0() * std::max(profit, 0.0));
  };
  auto j_of = [&](double z, int v) {
    if (price_const) return j_flat(z, v);
    return objective(params, unscaled, z, v, rule).objective;
  };

  double eps = 0.0;
  for (int v = 0; v <= 1; ++v) {
    const double dir = v == 0 ? -1.0 : 1.0;
    const double anchor = std::abs(v == 0 ? scaled.z0 : scaled.z1) * ng;
    const auto mags = detail::geometric_points(1e-3 * anchor, grid.hi_factor * anchor, grid.points);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < mags.size(); ++i) {
      const double val = j_of(dir * mags[i], v);
      if (val > best) {
        best = val;
        best_i = i;
      }
    }
    auto f = [&](double m) { return j_of(dir * m, v); };
    const auto [m_star, refined] = golden_section_max(
        f, mags[best_i == 0 ? 0 : best_i - 1], mags[std::min(best_i + 1, mags.size() - 1)], 1e-12);
    best = std::max(best, refined);
    const double at_candidate = j_of(dir * anchor, v);
    eps = std::max(eps, (best - at_candidate) / ng);
  }

  if (price_const) {
    const double root_n = std::sqrt(n);
    for (int i = 0; i < grid.y_points; ++i) {
      const double y_tilde = -grid.y_max + 2.0 * grid.y_max * i / (grid.y_points - 1.0);
      const double pn = price(params, unscaled, root_n * y_tilde);
      eps = std::max(eps, std::abs(*price_const - pn) / (1.0 + std::abs(y_tilde)));
    }
  }
  return eps;
}

// Finite-N solves across a population sweep, scaled-strategy errors against
// the limiting equilibrium, and the fitted log-log convergence slopes.
inline ConvergenceReport convergence_report(const ModelParams& params_base,
                                            const std::vector<std::int64_t>& n_list,
                                            const SolverOptions& opts = {}) {
  if (n_list.size() < 4)
    throw std::invalid_argument("convergence_report: need at least 4 population sizes");
  const double gamma = stealth_index(params_base);
  if (!(gamma < 0.5)) throw std::invalid_argument("convergence_report: requires gamma < 1/2");

  std::vector<std::int64_t> ns = n_list;
  std::sort(ns.begin(), ns.end());
  if (!(static_cast<double>(ns.back()) / static_cast<double>(ns.front()) >= 100.0))
    throw std::invalid_argument("convergence_report: sweep must span at least two decades");

  const LimitingSolution lim = solve_limiting(params_base, opts);

  const double alpha = params_base.penalty.growth_alpha();
  const bool civil_rate = alpha == 1.0 || params_base.hazard.beta == 0.0;
  const double bound_exponent =
      civil_rate ? 2.0 * gamma - 1.0
                 : std::max({2.0 * gamma - 1.0, -gamma * (alpha - 1.0) * params_base.hazard.theta_prime,
                             -gamma * params_base.penalty.alpha_prime});

  std::vector<std::future<EquilibriumSolution>> jobs;
  jobs.reserve(ns.size());
  for (std::int64_t n : ns) {
    jobs.push_back(std::async(std::launch::async, [&params_base, &opts, n]() {
      ModelParams p = params_base;
      p.n_pop = n;
      return solve_finite(p, opts);
    }));
  }

  ConvergenceReport report;
  report.gamma = gamma;
  report.limit_strategy = lim.strategy_scaled;
  std::vector<double> xs, e0, e1;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    EquilibriumSolution eq;
    try {
      eq = jobs[i].get();
    } catch (const std::exception& ex) {
      report.errors.emplace_back(ns[i], ex.what());  // partial report
      continue;
    }
    const double ng = std::pow(static_cast<double>(ns[i]), gamma);
    ConvergenceReport::Row row{};
    row.n = ns[i];
    row.scaled = Strategy{eq.strategy.z0 / ng, eq.strategy.z1 / ng};
    row.err0 = std::abs(row.scaled.z0 - lim.strategy_scaled.z0);
    row.err1 = std::abs(row.scaled.z1 - lim.strategy_scaled.z1);
    row.bound_exponent = bound_exponent;
    report.rows.push_back(row);
    xs.push_back(static_cast<double>(ns[i]));
    e0.push_back(row.err0);
    e1.push_back(row.err1);

    // sup over scaled order flows of the price deviation, the epsilon_N proxy
    ModelParams p = params_base;
    p.n_pop = ns[i];
    double sup = 0.0;
    const double root_n = std::sqrt(static_cast<double>(ns[i]));
    for (int k = 0; k < 81; ++k) {
      const double y_tilde = -4.0 + 8.0 * k / 80.0;
      const double pn = price(p, eq.strategy, root_n * y_tilde);
      sup = std::max(sup, std::abs(pn - params_base.p) / (1.0 + std::abs(y_tilde)));
    }
    report.epsilon_rows.emplace_back(ns[i], sup);
  }

  const std::size_t skip = ns.size() / 4;  // finite-N transients pollute the smallest rows
  report.fitted_slope = {detail::fit_loglog_slope(xs, e0, skip),
                         detail::fit_loglog_slope(xs, e1, skip)};
  return report;
}

// Regression data for the weak-deterrence continuum: the scaled objective is
// flat at 1/4 on both tails and strictly below it in the interior.
struct Example3Regression {
  double tail_max_deviation;   // max |J - 1/4| over both tails
  double interior_max;         // largest interior objective value
  bool interior_strictly_below;
  std::vector<std::pair<double, double>> tail_samples;
  std::vector<std::pair<double, double>> interior_samples;
};

inline Example3Regression example3_regression() {
  ModelParams params;
  params.p = 1.0 / 3.0;
  params.sigma = 1.0;
  params.n_pop = 1;
  params.hazard = HazardModel::log_abs_hazard(1.0, 0.0);
  params.penalty = PenaltyModel::example3_penalty();

  Example3Regression reg{};
  reg.tail_max_deviation = 0.0;
  reg.interior_max = -std::numeric_limits<double>::infinity();

  for (int i = 0; i <= 200; ++i) {
    const double z = -6.0 - 54.0 * i / 200.0;  // sell tail
    const double j = limiting_objective(params, z, 0);
    reg.tail_samples.emplace_back(z, j);
    reg.tail_max_deviation = std::max(reg.tail_max_deviation, std::abs(j - 0.25));
  }
  for (int i = 0; i <= 200; ++i) {
    const double z = 1.2 + 58.8 * i / 200.0;  // buy tail
    const double j = limiting_objective(params, z, 1);
    reg.tail_samples.emplace_back(z, j);
    reg.tail_max_deviation = std::max(reg.tail_max_deviation, std::abs(j - 0.25));
  }
  for (int i = 1; i < 200; ++i) {
    const double z = -6.0 + 6.0 * i / 200.0;  // interior sell branch
    const double j = limiting_objective(params, z, 0);
    reg.interior_samples.emplace_back(z, j);
    reg.interior_max = std::max(reg.interior_max, j);
  }
  for (int i = 1; i < 200; ++i) {
    const double z = 1.2 * i / 200.0;  // interior buy branch
    const double j = limiting_objective(params, z, 1);
    reg.interior_samples.emplace_back(z, j);
    reg.interior_max = std::max(reg.interior_max, j);
  }
  reg.interior_strictly_below = reg.interior_max < 0.25;
  return reg;
}

}  // namespace stealth
