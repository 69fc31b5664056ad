// Acceptance suite: runs every headline check at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stealth/calibration.hpp"
#include "stealth/equilibrium.hpp"
#include "stealth/market.hpp"
#include "stealth/model.hpp"

using namespace stealth;

namespace {

int g_failures = 0;

struct Criterion {
  std::string name;
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

void report(const Criterion& c, double seconds) {
  std::printf("[%s] %-68s (%.2fs)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), seconds);
  for (const auto& note : c.notes) std::printf("       %s\n", note.c_str());
  if (!c.pass) ++g_failures;
}

void run(const std::string& name, const std::function<void(Criterion&)>& body) {
  Criterion c;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& ex) {
    c.require(false, std::string("exception: ") + ex.what());
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(c, dt);
}

ModelParams civil_quadratic(double p, double sigma, std::int64_t n, double K, double beta,
                            double chi) {
  ModelParams params;
  params.p = p;
  params.sigma = sigma;
  params.n_pop = n;
  params.hazard = HazardModel::quadratic_hazard(K, beta);
  params.penalty = PenaltyModel::civil(chi);
  return params;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double slope_fit(const std::vector<double>& ns, const std::vector<double>& errs,
                 std::size_t skip) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = skip; i < ns.size(); ++i) {
    const double lx = std::log(ns[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

int main() {
  // 1. limiting closed form under treble damages
  run("1. limiting closed form: quadratic hazard, chi=3 -> +-0.350753", [](Criterion& c) {
    const ModelParams params = civil_quadratic(0.5, 1.0, 1, 1.0, 0.3, 3.0);
    solve_limiting(params);  // warm-up outside the timed region
    const auto t0 = std::chrono::steady_clock::now();
    const LimitingSolution lim = solve_limiting(params);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    c.require(std::abs(lim.strategy_scaled.z1 - 0.350753) <= 1e-5,
              "z1 = " + fmt(lim.strategy_scaled.z1));
    c.require(std::abs(lim.strategy_scaled.z0 + 0.350753) <= 1e-5,
              "z0 = " + fmt(lim.strategy_scaled.z0));
    c.require(ms < 1.0, "runtime " + fmt(ms) + " ms >= 1 ms");
  });

  // 2. mixed linear hazard/penalty closed form
  run("2. mixed penalties: p=1/3, lambda=C0=|z|, chi=1 -> (-0.138547, 0.23844)", [](Criterion& c) {
    ModelParams params;
    params.p = 1.0 / 3.0;
    params.sigma = 1.0;
    params.n_pop = 1;
    params.hazard = HazardModel::absolute_hazard(1.0, 0.2);
    params.penalty = PenaltyModel::linear_penalty(1.0, 1.0);
    const LimitingSolution lim = solve_limiting(params);
    c.require(std::abs(lim.strategy_scaled.z0 + 0.138547) <= 1e-5,
              "z0 = " + fmt(lim.strategy_scaled.z0));
    c.require(std::abs(lim.strategy_scaled.z1 - 0.23844) <= 1e-5,
              "z1 = " + fmt(lim.strategy_scaled.z1));
  });

  // 3. first calibration table
  run("3. calibration table I: all 9 (N, gamma) cells", [](Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const CalibrationStats stats = builtin_stats_1980s();
    const double gamma_golden[3][3] = {{0.207091, 0.21289, 0.23226},
                                       {0.249565, 0.256553, 0.274849},
                                       {0.270651, 0.27823, 0.295992}};
    const std::int64_t n_golden[3] = {61729, 45708, 59918};
    const ConditionPair pairs[3] = {ConditionPair::insider_total, ConditionPair::insider_ratio,
                                    ConditionPair::total_ratio};
    for (int ci = 0; ci < 3; ++ci) {
      for (int pi = 0; pi < 3; ++pi) {
        const CalibrationResult cal = calibrate(stats, ci + 1.0, pairs[pi]);
        c.require(cal.n_hat_rounded == n_golden[pi],
                  "chi=" + std::to_string(ci + 1) + " pair " + std::to_string(pi) +
                      ": N = " + std::to_string(cal.n_hat_rounded));
        c.require(std::abs(cal.gamma_hat - gamma_golden[ci][pi]) <= 1e-4,
                  "chi=" + std::to_string(ci + 1) + " pair " + std::to_string(pi) +
                      ": gamma = " + fmt(cal.gamma_hat));
      }
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(dt < 1.0, "runtime " + fmt(dt) + " s >= 1 s");
  });

  // 4. dispersion estimators
  run("4. mu and std estimators", [](Criterion& c) {
    const double mu = estimate_mu(9819.0, 113909.0, 1000.0, 248452.0);
    c.require(std::abs(mu - 1.68625) <= 1e-4, "mu = " + fmt(mu));
    const double s = std_from_stderr(10246.0, 588);
    c.require(std::abs(s - 248452.0) <= 1.0, "s = " + fmt(s));
  });

  // 5. second calibration table
  run("5. calibration table II: (108858, gamma by chi)", [](Criterion& c) {
    const CalibrationStats stats = builtin_stats_1995_2018();
    const double gamma_golden[3] = {0.137029, 0.177425, 0.19748};
    for (int ci = 0; ci < 3; ++ci) {
      const CalibrationResult cal = calibrate(stats, ci + 1.0, ConditionPair::insider_ratio);
      c.require(cal.n_hat_rounded == 108858, "N = " + std::to_string(cal.n_hat_rounded));
      c.require(std::abs(cal.gamma_hat - gamma_golden[ci]) <= 1e-4,
                "chi=" + std::to_string(ci + 1) + ": gamma = " + fmt(cal.gamma_hat));
    }
  });

  // 6. finite-population solves at the calibrated points
  run("6. finite equilibria at the chi=3 calibrated parameters", [](Criterion& c) {
    struct Case {
      CalibrationStats stats;
      ConditionPair pair;
      double golden;
    };
    const Case cases[] = {
        {builtin_stats_1980s(), ConditionPair::insider_total, 9813.0},
        {builtin_stats_1980s(), ConditionPair::insider_ratio, 9811.0},
        {builtin_stats_1980s(), ConditionPair::total_ratio, 12862.0},
        {builtin_stats_1995_2018(), ConditionPair::insider_ratio, 4900.0},
    };
    for (const Case& cs : cases) {
      const CalibrationResult cal = calibrate(cs.stats, 3.0, cs.pair);
      const ModelParams params = calibrated_params(cal, cs.stats.sigma, 3.0);
      const auto t0 = std::chrono::steady_clock::now();
      const EquilibriumSolution eq = solve_finite(params);
      const double dt =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      c.require(std::abs(eq.strategy.z1 - cs.golden) <= 3.0,
                std::string(to_string(cs.pair)) + ": z1 = " + fmt(eq.strategy.z1) +
                    " vs golden " + fmt(cs.golden) + " +-3");
      c.require(std::abs(eq.strategy.z0 + cs.golden) <= 3.0,
                std::string(to_string(cs.pair)) + ": z0 = " + fmt(eq.strategy.z0));
      c.require(dt < 30.0, "runtime " + fmt(dt) + " s >= 30 s");
      if (cs.golden == 4900.0) {
        const double pros = prosecution_marginal(params, eq.strategy);
        c.require(std::abs(pros - 0.11572) <= 5e-5, "finite prosecution = " + fmt(pros));
        c.require(std::abs(cal.implied_prosecution - 0.11576) <= 5e-5,
                  "limiting prosecution = " + fmt(cal.implied_prosecution));
      }
    }
  });

  // 7. strategy convergence slope
  run("7. convergence slope at gamma = 0.25 over N = 1e3..1e7", [](Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelParams base = civil_quadratic(0.5, 1000.0, 1, 5e-7, 0.25, 3.0);
    const ConvergenceReport rep =
        convergence_report(base, {1000, 10000, 100000, 1000000, 10000000});
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(rep.errors.empty(), "sweep had solver failures");
    c.require(rep.fitted_slope.first <= -0.35, "slope v=0: " + fmt(rep.fitted_slope.first));
    c.require(rep.fitted_slope.second <= -0.35, "slope v=1: " + fmt(rep.fitted_slope.second));
    c.require(dt < 300.0, "runtime " + fmt(dt) + " s >= 5 min");
  });

  // 8. epsilon-equilibrium scaling
  run("8. epsilon-equilibrium slope <= gamma - 1/2 + 0.15", [](Criterion& c) {
    const ModelParams base = civil_quadratic(0.5, 1000.0, 1, 5e-7, 0.25, 3.0);
    const LimitingSolution lim = solve_limiting(base);
    std::vector<double> ns, eps;
    for (std::int64_t n : {1000, 10000, 100000, 1000000, 10000000}) {
      ModelParams params = base;
      params.n_pop = n;
      ns.push_back(static_cast<double>(n));
      eps.push_back(certify_epsilon_equilibrium(params, lim.strategy_scaled, base.p));
    }
    const double slope = slope_fit(ns, eps, 1);
    c.require(slope <= 0.25 - 0.5 + 0.15, "slope: " + fmt(slope));
  });

  // 9. invariant-based property suite
  run("9. property suite (log-concavity, best response, price limits, continuum)",
      [](Criterion& c) {
        // (a) log-concavity of the expected profit on 50 random draws
        std::mt19937_64 rng(90210);
        std::uniform_real_distribution<double> up(0.15, 0.85), uz(0.2, 3.0), un(0.0, 4.0);
        for (int rep = 0; rep < 50; ++rep) {
          ModelParams params = civil_quadratic(up(rng), 1.0, 1 + static_cast<std::int64_t>(std::pow(10.0, un(rng))),
                                               1.0, 0.3, 2.0);
          const Strategy strat{-uz(rng), uz(rng)};
          for (int v = 0; v <= 1; ++v) {
            const double sgn = v == 0 ? -1.0 : 1.0;
            const int m = 200;
            const double lo = 0.05, hi = 5.0, h = (hi - lo) / (m - 1);
            std::vector<double> logq(m);
            for (int i = 0; i < m; ++i)
              logq[i] = std::log(expected_profit(params, strat, sgn * (lo + i * h), v));
            for (int i = 1; i + 1 < m; ++i) {
              const double dd = (logq[i + 1] - 2.0 * logq[i] + logq[i - 1]) / (h * h);
              if (!(dd <= 1e-9)) {
                c.require(false, "log-concavity violated, draw " + std::to_string(rep));
                break;
              }
            }
          }
        }

        // (b) brute-force best-response equivalence on 20 random small instances
        std::uniform_real_distribution<double> uk(0.3, 2.0), ub(0.05, 0.45), uchi(1.0, 4.0);
        std::uniform_int_distribution<std::int64_t> upop(20, 1000);
        for (int rep = 0; rep < 20; ++rep) {
          const ModelParams params =
              civil_quadratic(up(rng), 1.0, upop(rng), uk(rng), ub(rng), uchi(rng));
          const EquilibriumSolution eq = solve_finite(params);
          GridSpec grid;
          grid.points = 900;
          for (int v = 0; v <= 1; ++v) {
            const double br = brute_force_best_response(params, eq.strategy, v, grid);
            const double target = v == 0 ? eq.strategy.z0 : eq.strategy.z1;
            if (!(std::abs(br - target) <= 1e-4 * std::max(1.0, std::abs(target))))
              c.require(false, "best response mismatch, draw " + std::to_string(rep) + ": " +
                                   fmt(br) + " vs " + fmt(target));
          }
        }

        // (c) three price-limit regimes at N = 1e8
        {
          ModelParams params = civil_quadratic(0.37, 1.0, 100000000, 1.0, 0.3, 3.0);
          const Strategy strat{-2.0, 3.0};
          const double low = expected_price(params, strat, 1.5);
          c.require(std::abs(low - params.p) <= 1e-6, "gamma<1/2 limit: " + fmt(low));

          const Strategy scaled{-1.0, 1.0};
          ModelParams unit = civil_quadratic(0.37, 1.0, 1, 1.0, 0.3, 3.0);
          const double mid = limiting_price(scaled, 0.5, 0.8, 0.37);
          c.require(mid == price(unit, scaled, 0.8), "gamma=1/2 regime not exact");

          const double n = 1e8, g = 0.8;
          const Strategy big{-1.0 * std::pow(n, g), 1.0 * std::pow(n, g)};
          ModelParams pb = params;
          const double up_lim = price(pb, big, std::pow(n, g) * 1.0);
          const double dn_lim = price(pb, big, -std::pow(n, g) * 1.0);
          c.require(std::abs(up_lim - 1.0) <= 1e-6, "gamma>1/2 upper: " + fmt(up_lim));
          c.require(std::abs(dn_lim - 0.0) <= 1e-6, "gamma>1/2 lower: " + fmt(dn_lim));
          c.require(limiting_price(scaled, 0.8, 1.0, 0.37) == 1.0, "regime classification");
          c.require(limiting_price(scaled, 0.8, 0.0, 0.37) == 0.37, "regime tie classification");
        }

        // (d) weak-deterrence continuum regression
        {
          const Example3Regression reg = example3_regression();
          c.require(reg.tail_max_deviation <= 1e-12,
                    "tail deviation " + fmt(reg.tail_max_deviation));
          c.require(reg.interior_strictly_below, "interior not strictly below 1/4");
        }
      });

  // 10. mixed-penalty power branch against a grid argmax
  run("10. power-branch stealth index and closed form (gamma = 0.2)", [](Criterion& c) {
    ModelParams params;
    params.p = 0.5;
    params.sigma = 1.0;
    params.n_pop = 1;
    params.hazard = HazardModel::power_hazard(1.0, 2.0, 0.4);
    params.penalty = PenaltyModel::power_penalty(1.0, 1.0, 3.0, 1.0);
    c.require(stealth_index(0.4, 2.0, 3.0) == 0.2, "stealth index != 0.2");

    const LimitingSolution lim = solve_limiting(params);
    c.require(lim.gamma == 0.2, "gamma = " + fmt(lim.gamma));

    for (int v = 0; v <= 1; ++v) {
      const double dir = v == 0 ? -1.0 : 1.0;
      double best_m = 1e-4, best_val = -1e300;
      for (double m = 1e-4; m <= 4.0; m += 1e-6) {
        const double val = limiting_power_objective(params, dir * m, v);
        if (val > best_val) {
          best_val = val;
          best_m = m;
        }
      }
      // refine around the winning cell so the comparison is grid-noise free
      for (double m = best_m - 2e-6; m <= best_m + 2e-6; m += 1e-9) {
        const double val = limiting_power_objective(params, dir * m, v);
        if (val > best_val) {
          best_val = val;
          best_m = m;
        }
      }
      const double best_z = dir * best_m;
      const double target = v == 0 ? lim.strategy_scaled.z0 : lim.strategy_scaled.z1;
      c.require(std::abs(best_z - target) <= 1e-6,
                "v=" + std::to_string(v) + ": argmax " + fmt(best_z) + " vs " + fmt(target));
    }
  });

  std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
