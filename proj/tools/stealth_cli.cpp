// Command-line front end: model validation, equilibrium solves, convergence
// sweeps, calibration, and full table replication with CSV/SVG emission.
//
// Exit codes: 0 success, 2 config error, 3 assumption violation,
//             4 solver failure, 5 replication mismatch.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stealth/calibration.hpp"
#include "stealth/config.hpp"
#include "stealth/csv_io.hpp"
#include "stealth/equilibrium.hpp"
#include "stealth/market.hpp"
#include "stealth/model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitSolver = 4;
constexpr int kExitMismatch = 5;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  double tol = -1.0;
  std::string n_list;
};

std::string out_path(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

stealth::SolverOptions make_options(const stealth::Config& cfg, const CommonArgs& args) {
  stealth::SolverOptions opts = stealth::solver_from_config(cfg);
  if (args.tol > 0.0) opts.outer_tol = args.tol;
  return opts;
}

int cmd_validate(const CommonArgs& args) {
  const stealth::Config cfg = stealth::Config::from_file(args.config_path);
  const stealth::ModelParams params = stealth::model_from_config(cfg);
  const stealth::ValidationReport report = stealth::validate_assumptions(params);
  for (const auto& check : report.checks)
    std::printf("%s: %s (%s)\n", check.name.c_str(), check.pass ? "PASS" : "FAIL",
                check.detail.c_str());
  if (report.c0_bounded) std::printf("note: C0 is bounded at large |z|\n");
  return report.passed() ? kExitOk : kExitAssumption;
}

int cmd_solve(const CommonArgs& args, bool compare_limit) {
  const stealth::Config cfg = stealth::Config::from_file(args.config_path);
  const stealth::ModelParams params = stealth::model_from_config(cfg);
  const stealth::SolverOptions opts = make_options(cfg, args);

  const stealth::EquilibriumSolution eq = stealth::solve_finite(params, opts);
  std::printf("N = %lld\n", static_cast<long long>(eq.n_pop));
  std::printf("Z* = (%s, %s), zeta* = %s\n", stealth::fmt_float(eq.strategy.z0).c_str(),
              stealth::fmt_float(eq.strategy.z1).c_str(),
              stealth::fmt_float(eq.zeta_star).c_str());
  std::printf("residuals: F0 = %s, G1 = %s\n", stealth::fmt_float(eq.residual_f0).c_str(),
              stealth::fmt_float(eq.residual_g1).c_str());
  std::printf("roots found: %zu\n", eq.all_roots.size());

  if (compare_limit) {
    const double gamma = stealth::stealth_index(params);
    if (gamma >= 0.5) {
      std::printf("warning: stealth index %.6g is not below 1/2; limiting comparison skipped\n",
                  gamma);
    } else {
      const stealth::LimitingSolution lim = stealth::solve_limiting(params, opts);
      const double ng = std::pow(static_cast<double>(params.n_pop), gamma);
      std::printf("limiting (rescaled): (%s, %s)\n",
                  stealth::fmt_float(ng * lim.strategy_scaled.z0).c_str(),
                  stealth::fmt_float(ng * lim.strategy_scaled.z1).c_str());
    }
  }

  stealth::write_csv(out_path(args, "solve.csv"),
                     {"n_pop", "z0", "z1", "zeta", "residual_f0", "residual_g1"},
                     {{stealth::fmt_int(eq.n_pop), stealth::fmt_float(eq.strategy.z0),
                       stealth::fmt_float(eq.strategy.z1), stealth::fmt_float(eq.zeta_star),
                       stealth::fmt_float(eq.residual_f0), stealth::fmt_float(eq.residual_g1)}});
  return kExitOk;
}

int cmd_limit(const CommonArgs& args) {
  const stealth::Config cfg = stealth::Config::from_file(args.config_path);
  const stealth::ModelParams params = stealth::model_from_config(cfg);
  const stealth::SolverOptions opts = make_options(cfg, args);

  const stealth::LimitingSolution lim = stealth::solve_limiting(params, opts);
  const char* method = "?";
  switch (lim.method) {
    case stealth::LimitingSolution::Method::closed_form_lambert: method = "closed_form_lambert"; break;
    case stealth::LimitingSolution::Method::root_find: method = "root_find"; break;
    case stealth::LimitingSolution::Method::power_closed_form: method = "power_closed_form"; break;
    case stealth::LimitingSolution::Method::finite_n1_delegate: method = "finite_n1_delegate"; break;
  }
  std::printf("gamma = %s\n", stealth::fmt_float(lim.gamma).c_str());
  std::printf("Z~* = (%s, %s)  [%s]\n", stealth::fmt_float(lim.strategy_scaled.z0).c_str(),
              stealth::fmt_float(lim.strategy_scaled.z1).c_str(), method);
  if (lim.gamma < 0.5)
    std::printf("limiting price = %s\n", stealth::fmt_float(lim.price_constant).c_str());
  if (lim.multiple_roots_warning)
    std::printf("warning: first-order condition has multiple sign changes (non-unique regime)\n");

  stealth::write_csv(out_path(args, "limit.csv"),
                     {"gamma", "z0_scaled", "z1_scaled", "price_const", "method"},
                     {{stealth::fmt_float(lim.gamma), stealth::fmt_float(lim.strategy_scaled.z0),
                       stealth::fmt_float(lim.strategy_scaled.z1),
                       stealth::fmt_float(lim.price_constant), method}});
  return kExitOk;
}

int cmd_converge(const CommonArgs& args) {
  const stealth::Config cfg = stealth::Config::from_file(args.config_path);
  const stealth::ModelParams params = stealth::model_from_config(cfg);
  const stealth::SolverOptions opts = make_options(cfg, args);

  std::vector<std::int64_t> n_list;
  if (!args.n_list.empty()) {
    const stealth::Config inline_cfg = stealth::Config::from_string("n_list = " + args.n_list);
    n_list = inline_cfg.get_int_list("n_list");
  } else {
    n_list = cfg.get_int_list("converge.n_list");
  }

  const stealth::ConvergenceReport report = stealth::convergence_report(params, n_list, opts);
  for (const auto& [n, what] : report.errors)
    std::printf("N = %lld failed: %s\n", static_cast<long long>(n), what.c_str());
  if (report.rows.empty()) {
    std::fprintf(stderr, "solver failure: every population size in the sweep failed\n");
    return kExitSolver;
  }

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    rows.push_back({stealth::fmt_int(r.n), stealth::fmt_float(r.scaled.z0),
                    stealth::fmt_float(r.scaled.z1), stealth::fmt_float(r.err0),
                    stealth::fmt_float(r.err1), stealth::fmt_float(r.bound_exponent),
                    stealth::fmt_float(report.epsilon_rows[i].second)});
  }
  stealth::write_csv(out_path(args, "converge.csv"),
                     {"n", "z0_scaled", "z1_scaled", "err0", "err1", "theory_exponent", "eps_n"},
                     rows);
  std::printf("gamma = %s\n", stealth::fmt_float(report.gamma).c_str());
  std::printf("fitted slopes: %s (v=0), %s (v=1); theory %s\n",
              stealth::fmt_float(report.fitted_slope.first).c_str(),
              stealth::fmt_float(report.fitted_slope.second).c_str(),
              stealth::fmt_float(report.rows.front().bound_exponent).c_str());
  return kExitOk;
}

int cmd_calibrate(const CommonArgs& args, const std::string& stats_csv) {
  const stealth::Config cfg = stealth::Config::from_file(args.config_path);
  const stealth::CalibrationStats stats =
      stats_csv.empty() ? stealth::stats_from_config(cfg) : stealth::stats_from_csv(stats_csv);
  const double chi = cfg.get_double("calibrate.chi", 3.0);
  const stealth::ConditionPair pair =
      stealth::conditions_from_string(cfg.get_string("calibrate.conditions", "insider_total"));
  if (cfg.has("p") && cfg.get_double("p") != 0.5)
    std::printf("note: calibration closed forms assume p = 1/2; configured p ignored\n");

  const stealth::CalibrationResult res = stealth::calibrate(stats, chi, pair);
  std::printf("N_hat = %s (rounded %lld)\n", stealth::fmt_float(res.n_hat).c_str(),
              static_cast<long long>(res.n_hat_rounded));
  std::printf("gamma_hat = %s\n", stealth::fmt_float(res.gamma_hat).c_str());
  std::printf("mu_hat = %s\n", stealth::fmt_float(res.mu_hat).c_str());
  std::printf("implied prosecution probability = %s\n",
              stealth::fmt_float(res.implied_prosecution).c_str());
  if (!res.stealth_range_ok)
    std::printf("warning: gamma_hat outside the stealth range (0, 1/2)\n");

  stealth::write_csv(
      out_path(args, "calibration.csv"),
      {"conditions", "n_hat", "n_hat_rounded", "gamma_hat", "mu_hat", "implied_prosecution"},
      {{stealth::to_string(pair), stealth::fmt_float(res.n_hat),
        stealth::fmt_int(res.n_hat_rounded), stealth::fmt_float(res.gamma_hat),
        stealth::fmt_float(res.mu_hat), stealth::fmt_float(res.implied_prosecution)}});
  return res.stealth_range_ok ? kExitOk : kExitOk;
}

void write_figure(const CommonArgs& args, const std::string& stem,
                  const stealth::ReplicationReport::FigureCurve& curve) {
  std::vector<std::vector<std::string>> rows;
  std::vector<double> const_line(curve.y.size(), curve.p_const);
  for (std::size_t i = 0; i < curve.y.size(); ++i)
    rows.push_back({stealth::fmt_float(curve.y[i]), stealth::fmt_float(curve.p_n[i]),
                    stealth::fmt_float(curve.p_const)});
  stealth::write_csv(out_path(args, stem + ".csv"), {"y", "p_n_of_y", "p_const"}, rows);
  stealth::write_svg_plot(out_path(args, stem + ".svg"),
                          "Equilibrium price vs limiting price (N = " +
                              std::to_string(curve.n) + ")",
                          {{curve.y, curve.p_n, "steelblue"}, {curve.y, const_line, "firebrick"}});
}

int cmd_replicate(const CommonArgs& args) {
  stealth::SolverOptions opts;
  if (args.tol > 0.0) opts.outer_tol = args.tol;
  const stealth::ReplicationReport rep = stealth::replicate_tables(opts);

  // calibration table: experiment I, 3 penalty multipliers x 3 condition pairs
  std::vector<std::vector<std::string>> t2;
  for (const auto& row : rep.table2) {
    for (const auto* cell : {&row.insider_total, &row.insider_ratio, &row.total_ratio})
      t2.push_back({stealth::fmt_float(row.chi), stealth::to_string(cell->conditions),
                    stealth::fmt_int(cell->n_hat_rounded), stealth::fmt_float(cell->n_hat),
                    stealth::fmt_float(cell->gamma_hat)});
  }
  stealth::write_csv(out_path(args, "table2.csv"),
                     {"chi", "conditions", "n_hat_rounded", "n_hat", "gamma_hat"}, t2);

  std::vector<std::vector<std::string>> t3;
  for (const auto& col : rep.table3)
    t3.push_back({stealth::to_string(col.pair), stealth::fmt_float(col.finite.z0),
                  stealth::fmt_float(col.finite.z1), stealth::fmt_float(col.limiting_scaled.z0),
                  stealth::fmt_float(col.limiting_scaled.z1)});
  stealth::write_csv(out_path(args, "table3.csv"),
                     {"conditions", "finite_z0", "finite_z1", "limit_z0", "limit_z1"}, t3);

  std::vector<std::vector<std::string>> t5;
  for (std::size_t i = 0; i < rep.table5.size(); ++i)
    t5.push_back({stealth::fmt_float(static_cast<double>(i + 1)),
                  stealth::fmt_int(rep.table5[i].n_hat_rounded),
                  stealth::fmt_float(rep.table5[i].n_hat),
                  stealth::fmt_float(rep.table5[i].gamma_hat)});
  stealth::write_csv(out_path(args, "table5.csv"), {"chi", "n_hat_rounded", "n_hat", "gamma_hat"},
                     t5);

  stealth::write_csv(
      out_path(args, "table6.csv"),
      {"finite_z0", "finite_z1", "limit_z0", "limit_z1", "prosecution_finite",
       "prosecution_limiting"},
      {{stealth::fmt_float(rep.table6.finite.z0), stealth::fmt_float(rep.table6.finite.z1),
        stealth::fmt_float(rep.table6.limiting_scaled.z0),
        stealth::fmt_float(rep.table6.limiting_scaled.z1),
        stealth::fmt_float(rep.table6.prosecution_finite),
        stealth::fmt_float(rep.table6.prosecution_limiting)}});

  write_figure(args, "figure1", rep.figure1);
  write_figure(args, "figure2", rep.figure2);

  int failures = 0;
  for (const auto& cell : rep.cells) {
    if (!cell.pass) ++failures;
    std::printf("[%s] %s %s: %s (golden %s, tol %s)\n", cell.pass ? "ok" : "MISMATCH",
                cell.table.c_str(), cell.label.c_str(), stealth::fmt_float(cell.value).c_str(),
                stealth::fmt_float(cell.golden).c_str(), stealth::fmt_float(cell.tol).c_str());
  }
  for (const auto& err : rep.errors) {
    ++failures;
    std::printf("[ERROR] %s\n", err.c_str());
  }
  std::printf("%d of %zu golden checks failed\n", failures, rep.cells.size());
  return failures == 0 ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibria of an insider-trading market game with legal risk"};
  app.require_subcommand(1);

  CommonArgs args;
  bool compare_limit = false;
  std::string stats_csv;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", args.config_path, "model configuration file")->required();
    sub->add_option("--out", args.out_dir, "output directory for CSV/SVG files");
    sub->add_option("--tol", args.tol, "override solver residual tolerance");
  };

  CLI::App* validate = app.add_subcommand("validate", "check the standing model assumptions");
  add_common(validate, true);

  CLI::App* solve = app.add_subcommand("solve", "solve the finite-population equilibrium");
  add_common(solve, true);
  solve->add_flag("--compare-limit", compare_limit, "also report the rescaled limiting strategy");

  CLI::App* limit = app.add_subcommand("limit", "solve the limiting equilibrium");
  add_common(limit, true);

  CLI::App* converge = app.add_subcommand("converge", "population sweep and convergence slopes");
  add_common(converge, true);
  converge->add_option("--n-list", args.n_list, "comma-separated population sizes");

  CLI::App* calibrate = app.add_subcommand("calibrate", "method-of-moments estimation of (N, gamma)");
  add_common(calibrate, true);
  calibrate->add_option("--stats", stats_csv, "statistics CSV (name,value rows)");

  CLI::App* replicate = app.add_subcommand("replicate", "reproduce the calibration tables and figures");
  add_common(replicate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(args);
    if (solve->parsed()) return cmd_solve(args, compare_limit);
    if (limit->parsed()) return cmd_limit(args);
    if (converge->parsed()) return cmd_converge(args);
    if (calibrate->parsed()) return cmd_calibrate(args, stats_csv);
    if (replicate->parsed()) return cmd_replicate(args);
  } catch (const stealth::ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return kExitConfig;
  } catch (const stealth::AssumptionError& ex) {
    std::fprintf(stderr, "assumption violation: %s\n", ex.what());
    return kExitAssumption;
  } catch (const stealth::BracketingError& ex) {
    std::fprintf(stderr, "solver failure: %s\n", ex.what());
    return kExitSolver;
  } catch (const stealth::CalibrationError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return kExitConfig;
  } catch (const std::invalid_argument& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitSolver;
  }
  return kExitOk;
}
