#pragma once

#include <cmath>
#include <stdexcept>

#include "stealth/model.hpp"
#include "stealth/quadrature.hpp"

namespace stealth {

// Rational price as a logistic curve in the total order flow:
// P(y) = 1 / (1 + exp(a*y + b)).
struct PriceParams {
  double a;  // (Z(0) - Z(1)) / (N sigma^2), negative
  double b;  // log q + (Z(1)^2 - Z(0)^2) / (2 N sigma^2)
};

inline PriceParams price_params(const ModelParams& params, const Strategy& strat) {
  const double ns2 = static_cast<double>(params.n_pop) * params.sigma * params.sigma;
  return PriceParams{(strat.z0 - strat.z1) / ns2,
                     std::log(params.q()) + (strat.z1 * strat.z1 - strat.z0 * strat.z0) / (2.0 * ns2)};
}

namespace detail {

// 1/(1+e^t) with the exponent clamped; population sizes up to 1e8 drive t far
// outside the representable exp range.
inline double logistic(double t) {
  if (t > 700.0) t = 700.0;
  if (t < -700.0) t = -700.0;
  return 1.0 / (1.0 + std::exp(t));
}

// e^t/(1+e^t)^2, the logistic density kernel, clamped likewise.
inline double logistic_density(double t) {
  const double s = logistic(t);
  return s * (1.0 - s);
}

}  // namespace detail

// P_N(Z; y), the market maker's break-even price given total order flow y.
inline double price(const ModelParams& params, const Strategy& strat, double y) {
  strat.check();
  const PriceParams pp = price_params(params, strat);
  return detail::logistic(pp.a * y + pp.b);
}

// Phi_N(Z; z) = E[P_N(Z; sqrt(N) W + z)], W ~ Normal(0, sigma^2).
inline double expected_price(const ModelParams& params, const Strategy& strat, double z,
                             const QuadratureRule& rule = default_rule()) {
  strat.check();
  const PriceParams pp = price_params(params, strat);
  const double root_n = std::sqrt(static_cast<double>(params.n_pop));
  return gaussian_expectation(
      [&](double w) { return detail::logistic(pp.a * (root_n * w + z) + pp.b); }, params.sigma,
      rule);
}

// Q_N(Z; z, v) = (v - Phi_N(Z; z)) z, positive on the admissible sign branch.
inline double expected_profit(const ModelParams& params, const Strategy& strat, double z, int v,
                              const QuadratureRule& rule = default_rule()) {
  if (v != 0 && v != 1) throw std::invalid_argument("expected_profit: v must be 0 or 1");
  if (z == 0.0) return 0.0;  // boundary value by continuity
  if ((v == 0 && z > 0.0) || (v == 1 && z < 0.0))
    throw std::invalid_argument("expected_profit: z outside the sign branch for v");
  return (static_cast<double>(v) - expected_price(params, strat, z, rule)) * z;
}

struct ObjectiveTerms {
  double expected_price;          // Phi_N
  double expected_profit;         // Q_N
  double expected_extra_penalty;  // Psi_N = C0 + (chi-1) Q_N
  double objective;               // e^{-lambda_N} Q_N - (1 - e^{-lambda_N}) Psi_N
};

// Insider's expected net profit against the market maker's target strategy.
inline ObjectiveTerms objective(const ModelParams& params, const Strategy& strat, double z, int v,
                                const QuadratureRule& rule = default_rule()) {
  if (v != 0 && v != 1) throw std::invalid_argument("objective: v must be 0 or 1");
  if ((v == 0 && z > 0.0) || (v == 1 && z < 0.0))
    throw std::invalid_argument("objective: z outside the sign branch for v");

  ObjectiveTerms t{};
  t.expected_price = expected_price(params, strat, z, rule);
  t.expected_profit = (static_cast<double>(v) - t.expected_price) * z;
  t.expected_extra_penalty = params.penalty.c0(z) + params.penalty.chi0() * t.expected_profit;
  const double survival = std::exp(-hazard_value(params.hazard, params.n_pop, z));
  t.objective = survival * t.expected_profit - (1.0 - survival) * t.expected_extra_penalty;
  return t;
}

struct PhiPair {
  double value;
  double derivative;
};

// Expected price and its z-slope along sell-side offsets Z = (z, zeta + z):
//   PhiBar_N(zeta)  = E[1 / (1 + q e^{eta})],  eta = zeta (zeta - 2 sqrt(N) W) / (2 N sigma^2)
//   PhiBar'_N(zeta) = zeta/(N sigma^2) E[q e^{eta} / (1 + q e^{eta})^2]
inline PhiPair phi_bar(const ModelParams& params, double zeta,
                       const QuadratureRule& rule = default_rule()) {
  if (!(zeta > 0.0)) throw std::invalid_argument("phi_bar: zeta must be positive");
  const double n = static_cast<double>(params.n_pop);
  const double ns2 = n * params.sigma * params.sigma;
  const double logq = std::log(params.q());
  const double mean = zeta * zeta / (2.0 * ns2);
  const double slope = -zeta / (std::sqrt(n) * params.sigma * params.sigma);

  double val = 0.0, der = 0.0;
  const int m = rule.node_count();
  for (int i = 0; i < m; ++i) {
    const double w = params.sigma * rule.nodes[i];
    const double t = logq + mean + slope * w;
    val += rule.weights[i] * detail::logistic(t);
    der += rule.weights[i] * detail::logistic_density(t);
  }
  return PhiPair{val, zeta / ns2 * der};
}

// Same along buy-side offsets Z = (z - zeta, z), with the mirrored kernel
// eta = -zeta (zeta + 2 sqrt(N) W) / (2 N sigma^2).
inline PhiPair phi_hat(const ModelParams& params, double zeta,
                       const QuadratureRule& rule = default_rule()) {
  if (!(zeta > 0.0)) throw std::invalid_argument("phi_hat: zeta must be positive");
  const double n = static_cast<double>(params.n_pop);
  const double ns2 = n * params.sigma * params.sigma;
  const double logq = std::log(params.q());
  const double mean = -zeta * zeta / (2.0 * ns2);
  const double slope = -zeta / (std::sqrt(n) * params.sigma * params.sigma);

  double val = 0.0, der = 0.0;
  const int m = rule.node_count();
  for (int i = 0; i < m; ++i) {
    const double w = params.sigma * rule.nodes[i];
    const double t = logq + mean + slope * w;
    val += rule.weights[i] * detail::logistic(t);
    der += rule.weights[i] * detail::logistic_density(t);
  }
  return PhiPair{val, zeta / ns2 * der};
}

// g_{1,N}(z) = chi z lambda_N'(z) - chi + chi0 e^{lambda_N(z)}
inline double g1(const ModelParams& params, double z) {
  const double chi = params.penalty.chi, chi0 = params.penalty.chi0();
  const double lam = hazard_value(params.hazard, params.n_pop, z);
  return chi * hazard_z_dlambda(params.hazard, params.n_pop, z) - chi +
         chi0 * std::exp(std::min(lam, 700.0));
}

// g_{2,N}(z) = (chi0 e^{lambda_N(z)} - chi) z
inline double g2(const ModelParams& params, double z) {
  const double chi = params.penalty.chi, chi0 = params.penalty.chi0();
  const double lam = hazard_value(params.hazard, params.n_pop, z);
  return (chi0 * std::exp(std::min(lam, 700.0)) - chi) * z;
}

// A_N(z) = -lambda_N'(z) C0(z) - (e^{lambda_N(z)} - 1) C0'(z)
inline double a_n(const ModelParams& params, double z) {
  if (!params.penalty.has_criminal_component()) return 0.0;
  const double lam = hazard_value(params.hazard, params.n_pop, z);
  return -hazard_derivative(params.hazard, params.n_pop, z) * params.penalty.c0(z) -
         std::expm1(std::min(lam, 700.0)) * params.penalty.c0_derivative(z);
}

// Sell-side first-order condition at offset zeta:
// F0_N(zeta; z) = g1_N(z) PhiBar + g2_N(z) PhiBar' + A_N(z), z < 0.
inline double f0_given(const ModelParams& params, const PhiPair& bar, double z) {
  return g1(params, z) * bar.value + g2(params, z) * bar.derivative + a_n(params, z);
}

inline double f0(const ModelParams& params, double zeta, double z,
                 const QuadratureRule& rule = default_rule()) {
  return f0_given(params, phi_bar(params, zeta, rule), z);
}

// Buy-side condition evaluated at z1 = zeta + z0(zeta):
// G1_N(zeta) = g1_N(z1)(PhiHat - 1) + g2_N(z1) PhiHat' + A_N(z1).
inline double g1_condition_given(const ModelParams& params, const PhiPair& hat, double z1) {
  return g1(params, z1) * (hat.value - 1.0) + g2(params, z1) * hat.derivative + a_n(params, z1);
}

inline double g1_condition(const ModelParams& params, double zeta, double z0_of_zeta,
                           const QuadratureRule& rule = default_rule()) {
  return g1_condition_given(params, phi_hat(params, zeta, rule), zeta + z0_of_zeta);
}

// Large-population price limit at scaled order flow y_tilde, by stealth regime.
inline double limiting_price(const Strategy& strat, double gamma, double y_tilde, double p) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("limiting_price: gamma must be >= 0");
  if (gamma < 0.5) return p;
  if (gamma == 0.5) {
    ModelParams unit;
    unit.p = p;
    unit.sigma = 1.0;
    unit.n_pop = 1;
    return price(unit, strat, y_tilde);
  }
  const double mid = strat.z0 + strat.z1;
  if (2.0 * y_tilde > mid) return 1.0;
  if (2.0 * y_tilde == mid) return p;
  return 0.0;
}

}  // namespace stealth
