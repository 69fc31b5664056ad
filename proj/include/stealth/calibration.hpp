#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealth/equilibrium.hpp"
#include "stealth/market.hpp"
#include "stealth/model.hpp"
#include "stealth/special_functions.hpp"

namespace stealth {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Observed insider-volume statistics feeding the moment conditions. Volumes
// are in shares; sigma and mu describe a single liquidity trader's absolute
// order size (std and mean).
struct CalibrationStats {
  double insider_volume = 0.0;
  std::optional<double> total_volume;
  std::optional<double> volume_ratio;
  std::optional<double> total_volume_stderr;
  std::optional<int> episode_count;
  double sigma = 1000.0;
  std::optional<double> mu;
};

enum class ConditionPair { insider_total, insider_ratio, total_ratio };

inline const char* to_string(ConditionPair pair) {
  switch (pair) {
    case ConditionPair::insider_total: return "insider_total";
    case ConditionPair::insider_ratio: return "insider_ratio";
    case ConditionPair::total_ratio: return "total_ratio";
  }
  return "?";
}

struct CalibrationResult {
  double n_hat;
  std::int64_t n_hat_rounded;
  double gamma_hat;
  double mu_hat;
  ConditionPair conditions;
  double implied_prosecution;
  bool stealth_range_ok;
};

// P{prosecuted} = sum_v p(v) (1 - e^{-lambda_N(Z(v))})
inline double prosecution_marginal(const ModelParams& params, const Strategy& strat) {
  strat.check();
  return (1.0 - params.p) * prosecution_probability(params.hazard, params.n_pop, strat.z0) +
         params.p * prosecution_probability(params.hazard, params.n_pop, strat.z1);
}

// E[|Z(V)| | prosecuted]
inline double conditional_insider_volume(const ModelParams& params, const Strategy& strat) {
  strat.check();
  const double w0 =
      (1.0 - params.p) * prosecution_probability(params.hazard, params.n_pop, strat.z0);
  const double w1 = params.p * prosecution_probability(params.hazard, params.n_pop, strat.z1);
  const double denom = w0 + w1;
  if (!(denom > 0.0))
    throw CalibrationError("conditional_insider_volume: prosecution probability vanishes");
  return (w0 * std::abs(strat.z0) + w1 * strat.z1) / denom;
}

// E[X_N + |Z(V)| | prosecuted] with total liquidity volume
// X_N ~ Normal(N mu, N (sigma^2 - mu^2))
inline double conditional_total_volume(const ModelParams& params, const Strategy& strat,
                                       double mu) {
  if (!(mu > 0.0 && mu < params.sigma))
    throw std::invalid_argument("conditional_total_volume: need 0 < mu < sigma");
  return static_cast<double>(params.n_pop) * mu + conditional_insider_volume(params, strat);
}

// P{(X_N + |Z(V)|)/|Z(V)| > x | prosecuted}
inline double ratio_tail(const ModelParams& params, const Strategy& strat, double mu, double x) {
  if (!(x >= 1.0)) throw std::invalid_argument("ratio_tail: x must be >= 1");
  if (!(mu > 0.0 && mu < params.sigma))
    throw std::invalid_argument("ratio_tail: need 0 < mu < sigma");
  const double n = static_cast<double>(params.n_pop);
  const double denom_sd = std::sqrt(2.0 * n * (params.sigma * params.sigma - mu * mu));
  const double w0 =
      (1.0 - params.p) * prosecution_probability(params.hazard, params.n_pop, strat.z0);
  const double w1 = params.p * prosecution_probability(params.hazard, params.n_pop, strat.z1);
  const double t0 = 0.5 * stealth::erfc((std::abs(strat.z0) * (x - 1.0) - n * mu) / denom_sd);
  const double t1 = 0.5 * stealth::erfc((strat.z1 * (x - 1.0) - n * mu) / denom_sd);
  return (w0 * t0 + w1 * t1) / (w0 + w1);
}

// Sample std of the total volume from its standard error and episode count.
inline double std_from_stderr(double stderr_value, int episodes) {
  if (!(stderr_value > 0.0)) throw std::invalid_argument("std_from_stderr: stderr must be > 0");
  if (episodes < 1) throw std::invalid_argument("std_from_stderr: episodes must be >= 1");
  return stderr_value * std::sqrt(static_cast<double>(episodes));
}

// Per-trader mean absolute trade from N(sigma^2 - mu^2) = s^2 and N mu = v - i.
inline double estimate_mu(double insider, double total, double sigma, double s) {
  if (!(total > insider)) throw std::domain_error("estimate_mu: total volume must exceed insider volume");
  if (!(s > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("estimate_mu: s, sigma must be > 0");
  const double gap = total - insider;
  const double s2 = s * s;
  return (std::sqrt(s2 * s2 + 4.0 * sigma * sigma * gap * gap) - s2) / (2.0 * gap);
}

// Scaled limiting trade size per unit sigma under the quadratic hazard
// lambda(z) = z^2/(2 sigma^2): |Z~(v)| = sigma * sqrt(1 - 2 W0(sqrt(e) chi0 / (2 chi))).
inline double scaled_trade_amplitude(double chi) {
  if (!(chi >= 1.0)) throw std::invalid_argument("scaled_trade_amplitude: chi must be >= 1");
  const double chi0 = chi - 1.0;
  return std::sqrt(1.0 - 2.0 * lambert_w0(std::sqrt(std::exp(1.0)) * chi0 / (2.0 * chi)));
}

// Closed-form method-of-moments estimates of (N, gamma) from two of the three
// volume conditions, at p = 1/2 with the quadratic hazard K = 1/(2 sigma^2).
inline CalibrationResult calibrate(const CalibrationStats& stats, double chi,
                                   ConditionPair conditions) {
  if (!(stats.insider_volume > 0.0))
    throw CalibrationError("calibrate: insider volume statistic missing");
  const double sigma = stats.sigma;
  if (!(sigma > 0.0)) throw CalibrationError("calibrate: sigma must be positive");

  double mu;
  if (stats.mu) {
    mu = *stats.mu;
  } else {
    if (!stats.total_volume || !stats.total_volume_stderr || !stats.episode_count)
      throw CalibrationError(
          "calibrate: mu absent and not estimable (need total volume, stderr, episodes)");
    mu = estimate_mu(stats.insider_volume, *stats.total_volume, sigma,
                     std_from_stderr(*stats.total_volume_stderr, *stats.episode_count));
  }
  if (!(mu > 0.0 && mu < sigma)) throw CalibrationError("calibrate: mu outside (0, sigma)");

  const double a = scaled_trade_amplitude(chi);
  const double i = stats.insider_volume;

  CalibrationResult res{};
  res.mu_hat = mu;
  res.conditions = conditions;
  switch (conditions) {
    case ConditionPair::insider_total: {
      if (!stats.total_volume) throw CalibrationError("calibrate: total volume statistic missing");
      res.n_hat = (*stats.total_volume - i) / mu;
      res.gamma_hat = std::log(i / (sigma * a)) / std::log(res.n_hat);
      break;
    }
    case ConditionPair::insider_ratio: {
      if (!stats.volume_ratio) throw CalibrationError("calibrate: volume ratio statistic missing");
      const double r = *stats.volume_ratio;
      res.n_hat = i * (1.0 - r) / (mu * r);
      res.gamma_hat = std::log(i / (sigma * a)) / std::log(res.n_hat);
      break;
    }
    case ConditionPair::total_ratio: {
      if (!stats.total_volume || !stats.volume_ratio)
        throw CalibrationError("calibrate: total volume and ratio statistics both required");
      const double r = *stats.volume_ratio;
      res.n_hat = *stats.total_volume * (1.0 - r) / mu;
      res.gamma_hat = std::log(*stats.total_volume * r / (sigma * a)) / std::log(res.n_hat);
      break;
    }
  }
  if (!(res.n_hat > 1.0))
    throw CalibrationError("calibrate: statistics imply a population estimate of at most 1");
  res.n_hat_rounded = static_cast<std::int64_t>(std::llround(res.n_hat));
  // prosecution implied by the limiting strategy, independent of N and gamma
  res.implied_prosecution = -std::expm1(-0.5 * a * a);
  res.stealth_range_ok = res.gamma_hat > 0.0 && res.gamma_hat < 0.5;
  return res;
}

// Model instance matching a calibration point (p = 1/2, quadratic hazard with
// K = 1/(2 sigma^2), civil penalties).
inline ModelParams calibrated_params(const CalibrationResult& cal, double sigma, double chi) {
  ModelParams params;
  params.p = 0.5;
  params.sigma = sigma;
  params.n_pop = cal.n_hat_rounded;
  params.hazard = HazardModel::quadratic_hazard(1.0 / (2.0 * sigma * sigma), cal.gamma_hat);
  params.penalty = PenaltyModel::civil(chi);
  return params;
}

// Built-in fixtures: published summary statistics of SEC insider-trading case
// volumes for two non-overlapping samples.
inline CalibrationStats builtin_stats_1980s() {
  // daily share volumes, civil/administrative cases, 1980-1989
  CalibrationStats s;
  s.insider_volume = 9819.0;
  s.total_volume = 113909.0;
  s.volume_ratio = 0.113;
  s.total_volume_stderr = 10246.0;
  s.episode_count = 588;
  s.sigma = 1000.0;
  return s;
}

inline CalibrationStats builtin_stats_1995_2018() {
  // median share volumes, prosecuted cases, 1995-2018; per-trader mean
  // absolute trade carried over from the 1980s estimate
  CalibrationStats s;
  s.insider_volume = 4900.0;
  s.volume_ratio = 0.026;
  s.sigma = 1000.0;
  s.mu = 1.68625;
  return s;
}

// Full replication of the calibration tables and price-curve figure data,
// with golden-value comparisons.
struct ReplicationReport {
  struct Cell {
    std::string table;
    std::string label;
    double value;
    double golden;
    double tol;
    bool pass;
  };

  struct Table2Row {
    double chi;
    CalibrationResult insider_total;
    CalibrationResult insider_ratio;
    CalibrationResult total_ratio;
  };

  struct Table3Col {
    ConditionPair pair;
    Strategy finite;
    Strategy limiting_scaled;
  };

  struct Table6Data {
    Strategy finite;
    Strategy limiting_scaled;
    double prosecution_finite;
    double prosecution_limiting;
  };

  struct FigureCurve {
    std::int64_t n;
    std::vector<double> y;
    std::vector<double> p_n;
    double p_const;
  };

  std::vector<Table2Row> table2;
  std::vector<Table3Col> table3;
  std::vector<CalibrationResult> table5;
  Table6Data table6{};
  FigureCurve figure1{}, figure2{};
  std::vector<Cell> cells;
  std::vector<std::string> errors;

  bool all_pass() const {
    if (!errors.empty()) return false;
    for (const auto& c : cells)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline void check_cell(ReplicationReport& rep, const std::string& table, const std::string& label,
                       double value, double golden, double tol) {
  rep.cells.push_back({table, label, value, golden, tol, std::abs(value - golden) <= tol});
}

inline ReplicationReport::FigureCurve price_curve(const ModelParams& params,
                                                  const Strategy& strat) {
  ReplicationReport::FigureCurve curve;
  curve.n = params.n_pop;
  curve.p_const = params.p;
  const double span = 3.0 * std::sqrt(static_cast<double>(params.n_pop)) * params.sigma;
  const int points = 201;
  for (int i = 0; i < points; ++i) {
    const double y = -span + 2.0 * span * i / (points - 1.0);
    curve.y.push_back(y);
    curve.p_n.push_back(price(params, strat, y));
  }
  return curve;
}

}  // namespace detail

inline ReplicationReport replicate_tables(const SolverOptions& opts = {}) {
  ReplicationReport rep;
  const CalibrationStats exp1 = builtin_stats_1980s();
  const CalibrationStats exp2 = builtin_stats_1995_2018();

  // experiment I grid: three condition pairs, chi in {1,2,3}
  const double gamma_golden[3][3] = {{0.207091, 0.21289, 0.23226},
                                     {0.249565, 0.256553, 0.274849},
                                     {0.270651, 0.27823, 0.295992}};
  const double n_golden[3] = {61729.0, 45708.0, 59918.0};
  const ConditionPair pairs[3] = {ConditionPair::insider_total, ConditionPair::insider_ratio,
                                  ConditionPair::total_ratio};

  for (int ci = 0; ci < 3; ++ci) {
    const double chi = ci + 1.0;
    ReplicationReport::Table2Row row{};
    row.chi = chi;
    CalibrationResult* slots[3] = {&row.insider_total, &row.insider_ratio, &row.total_ratio};
    for (int pi = 0; pi < 3; ++pi) {
      *slots[pi] = calibrate(exp1, chi, pairs[pi]);
      detail::check_cell(rep, "table2",
                         "chi=" + std::to_string(ci + 1) + "," + to_string(pairs[pi]) + ",N",
                         static_cast<double>(slots[pi]->n_hat_rounded), n_golden[pi], 0.0);
      detail::check_cell(rep, "table2",
                         "chi=" + std::to_string(ci + 1) + "," + to_string(pairs[pi]) + ",gamma",
                         slots[pi]->gamma_hat, gamma_golden[ci][pi], 1e-4);
    }
    rep.table2.push_back(row);
  }

  // experiment I finite solves at chi = 3
  const double finite_golden1[3] = {9813.0, 9811.0, 12862.0};
  const double limit_golden1[3] = {9819.0, 9819.0, 12872.0};
  for (int pi = 0; pi < 3; ++pi) {
    const CalibrationResult cal = calibrate(exp1, 3.0, pairs[pi]);
    const ModelParams params = calibrated_params(cal, exp1.sigma, 3.0);
    ReplicationReport::Table3Col col{};
    col.pair = pairs[pi];
    try {
      const EquilibriumSolution eq = solve_finite(params, opts);
      col.finite = eq.strategy;
      const double ng = std::pow(cal.n_hat, cal.gamma_hat);
      const double amp = scaled_trade_amplitude(3.0) * exp1.sigma;
      col.limiting_scaled = Strategy{-ng * amp, ng * amp};
      detail::check_cell(rep, "table3", std::string(to_string(pairs[pi])) + ",finite_z1",
                         col.finite.z1, finite_golden1[pi], 3.0);
      detail::check_cell(rep, "table3", std::string(to_string(pairs[pi])) + ",finite_z0",
                         col.finite.z0, -finite_golden1[pi], 3.0);
      detail::check_cell(rep, "table3", std::string(to_string(pairs[pi])) + ",limit_z1",
                         col.limiting_scaled.z1, limit_golden1[pi], 3.0);
      if (pi == 0) rep.figure1 = detail::price_curve(params, eq.strategy);
    } catch (const std::exception& ex) {
      rep.errors.push_back(std::string("table3 ") + to_string(pairs[pi]) + ": " + ex.what());
    }
    rep.table3.push_back(col);
  }

  // experiment II: insider volume + ratio conditions
  const double gamma_golden2[3] = {0.137029, 0.177425, 0.19748};
  for (int ci = 0; ci < 3; ++ci) {
    const double chi = ci + 1.0;
    const CalibrationResult cal = calibrate(exp2, chi, ConditionPair::insider_ratio);
    rep.table5.push_back(cal);
    detail::check_cell(rep, "table5", "chi=" + std::to_string(ci + 1) + ",N",
                       static_cast<double>(cal.n_hat_rounded), 108858.0, 0.0);
    detail::check_cell(rep, "table5", "chi=" + std::to_string(ci + 1) + ",gamma", cal.gamma_hat,
                       gamma_golden2[ci], 1e-4);
  }

  {
    const CalibrationResult cal = calibrate(exp2, 3.0, ConditionPair::insider_ratio);
    const ModelParams params = calibrated_params(cal, exp2.sigma, 3.0);
    try {
      const EquilibriumSolution eq = solve_finite(params, opts);
      rep.table6.finite = eq.strategy;
      const double ng = std::pow(cal.n_hat, cal.gamma_hat);
      const double amp = scaled_trade_amplitude(3.0) * exp2.sigma;
      rep.table6.limiting_scaled = Strategy{-ng * amp, ng * amp};
      rep.table6.prosecution_finite = prosecution_marginal(params, eq.strategy);
      rep.table6.prosecution_limiting = cal.implied_prosecution;
      detail::check_cell(rep, "table6", "finite_z1", eq.strategy.z1, 4900.0, 3.0);
      detail::check_cell(rep, "table6", "finite_z0", eq.strategy.z0, -4900.0, 3.0);
      detail::check_cell(rep, "table6", "limit_z1", rep.table6.limiting_scaled.z1, 4900.0, 3.0);
      detail::check_cell(rep, "table6", "prosecution_finite", rep.table6.prosecution_finite,
                         0.11572, 5e-5);
      detail::check_cell(rep, "table6", "prosecution_limiting", rep.table6.prosecution_limiting,
                         0.11576, 5e-5);
      rep.figure2 = detail::price_curve(params, eq.strategy);
    } catch (const std::exception& ex) {
      rep.errors.push_back(std::string("table6: ") + ex.what());
    }
  }

  return rep;
}

}  // namespace stealth
