#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "stealth/model.hpp"

using namespace stealth;

TEST_CASE("hazard_value across families") {
  const HazardModel quad = HazardModel::quadratic_hazard(1.0, 0.0);
  CHECK(hazard_value(quad, 1, 0.0) == 0.0);

  const HazardModel cal = HazardModel::quadratic_hazard(1.0 / (2.0 * 1000.0 * 1000.0), 0.270651);
  CHECK(hazard_value(cal, 1, 496.05) == Catch::Approx(0.12304).margin(1e-4));

  const HazardModel abs = HazardModel::absolute_hazard(1.0, 0.5);
  CHECK(hazard_value(abs, 16, 8.0) == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("hazard scaling law is exact") {
  const HazardModel models[] = {
      HazardModel::quadratic_hazard(0.7, 0.3),
      HazardModel::absolute_hazard(2.0, 0.45),
      HazardModel::power_hazard(1.3, 1.7, 0.25),
      HazardModel::erfc_detection_hazard(0.5, 1.0, 2.0, 1.0),
      HazardModel::log_abs_hazard(1.0, 0.2),
  };
  for (const auto& h : models) {
    for (std::int64_t n : {2, 100, 61729, 100000000}) {
      for (double z : {-250.0, -1.0, 0.5, 3.0, 1000.0}) {
        const double scaled = std::pow(static_cast<double>(n), -h.beta) * z;
        CHECK(hazard_value(h, n, z) == hazard_value(h, 1, scaled));
      }
    }
  }
}

TEST_CASE("hazard_derivative closed forms and finite differences") {
  const HazardModel quad = HazardModel::quadratic_hazard(1.0, 0.0);
  CHECK(hazard_derivative(quad, 1, -0.5) == Catch::Approx(-1.0).epsilon(1e-14));

  const HazardModel abs = HazardModel::absolute_hazard(1.0, 0.0);
  CHECK(hazard_derivative(abs, 1, 3.0) == Catch::Approx(1.0).epsilon(1e-14));

  const HazardModel det = HazardModel::erfc_detection_hazard(0.4, 1.0, 2.0, 1.0);
  const double fd = oracles::central_diff([&](double z) { return hazard_value(det, 1, z); }, 0.7, 1e-6);
  CHECK(hazard_derivative(det, 1, 0.7) == Catch::Approx(fd).margin(1e-6));
}

TEST_CASE("hazard_derivative matches finite differences across families") {
  const HazardModel models[] = {
      HazardModel::quadratic_hazard(0.002, 0.3),
      HazardModel::power_hazard(0.05, 1.5, 0.2),
      HazardModel::erfc_detection_hazard(0.001, 2.0, 3.0, 10.0),
  };
  for (const auto& h : models) {
    for (double mag : {0.01, 0.5, 3.0, 40.0, 100.0}) {
      for (double s : {-1.0, 1.0}) {
        const double z = s * mag;
        const double d = hazard_derivative(h, 7, z);
        const double fd =
            oracles::central_diff([&](double x) { return hazard_value(h, 7, x); }, z, 1e-6 * mag);
        CHECK(std::abs(d - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        CHECK(d * s > 0.0);  // sign matches sign(z)
      }
    }
  }
}

TEST_CASE("prosecution_probability") {
  const HazardModel quad = HazardModel::quadratic_hazard(1.0 / 2e6, 0.19748);
  CHECK(prosecution_probability(quad, 1, 0.0) == 0.0);
  CHECK(prosecution_probability(quad, 1, 496.05) == Catch::Approx(0.11576).margin(1e-4));

  const HazardModel ln2 = HazardModel::absolute_hazard(std::log(2.0), 0.0);
  CHECK(prosecution_probability(ln2, 1, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("prosecution_probability strictly increasing in |z|") {
  const HazardModel models[] = {
      HazardModel::quadratic_hazard(0.1, 0.25),
      HazardModel::erfc_detection_hazard(0.2, 1.0, 2.5, 1.0),
  };
  for (const auto& h : models) {
    for (double s : {-1.0, 1.0}) {
      double prev = 0.0;
      for (double mag = 0.01; mag < 25.0; mag *= 1.6) {
        const double cur = prosecution_probability(h, 10, s * mag);
        CHECK(cur > prev);
        prev = cur;
      }
    }
  }
}

TEST_CASE("penalty_total") {
  const PenaltyModel civil = PenaltyModel::civil(3.0);
  CHECK(penalty_total(civil, 1.0, -1.0) == 0.0);
  CHECK(penalty_total(civil, 1.0, 2.0) == 6.0);

  const PenaltyModel ex3 = PenaltyModel::example3_penalty();
  CHECK(penalty_total(ex3, -6.0, 0.0) == Catch::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("disgorgement floor") {
  const PenaltyModel pens[] = {PenaltyModel::civil(2.0), PenaltyModel::linear_penalty(1.5, 0.3),
                               PenaltyModel::power_penalty(3.0, 0.1, 2.0)};
  for (const auto& pen : pens) {
    for (double z : {-4.0, -0.5, 0.7, 9.0}) {
      for (double profit : {-2.0, 0.0, 1.3}) {
        const double floor = pen.chi * std::max(profit, 0.0);
        CHECK(penalty_total(pen, z, profit) >= floor);
        if (pen.c0(z) == 0.0) CHECK(penalty_total(pen, z, profit) == floor);
      }
    }
  }
}

TEST_CASE("example3 penalty branches are continuous") {
  const PenaltyModel ex3 = PenaltyModel::example3_penalty();
  for (double z : {-6.0, 0.0, 1.2}) {
    CHECK(ex3.c0(z - 1e-10) == Catch::Approx(ex3.c0(z + 1e-10)).margin(1e-9));
  }
  CHECK(ex3.c0(0.0) == 0.0);
}

TEST_CASE("validator passes the quadratic family") {
  ModelParams params;
  params.p = 0.5;
  params.sigma = 1.0;
  params.n_pop = 10;
  params.hazard = HazardModel::quadratic_hazard(1.0, 0.3);
  params.penalty = PenaltyModel::civil(3.0);
  const ValidationReport report = validate_assumptions(params);
  CHECK(report.passed());
  CHECK(report.fitted_theta == Catch::Approx(2.0).margin(0.05));
}

TEST_CASE("validator fails the concave log hazard") {
  ModelParams params;
  params.p = 1.0 / 3.0;
  params.sigma = 1.0;
  params.n_pop = 1;
  params.hazard = HazardModel::log_abs_hazard(1.0, 0.0);
  params.penalty = PenaltyModel::example3_penalty();
  const ValidationReport report = validate_assumptions(params);
  CHECK_FALSE(report.passed());
  bool convexity_failed = false;
  for (const auto& c : report.checks)
    if (c.name == "hazard convexity" && !c.pass) convexity_failed = true;
  CHECK(convexity_failed);
  CHECK(report.c0_bounded);
}

TEST_CASE("validator fits the detection exponent min(theta_D, 2)") {
  ModelParams params;
  params.p = 0.5;
  params.sigma = 1.0;
  params.n_pop = 1;
  params.hazard = HazardModel::erfc_detection_hazard(0.3, 1.0, 2.0, 1.0);
  params.penalty = PenaltyModel::civil(1.0);
  const ValidationReport report = validate_assumptions(params);
  CHECK(report.fitted_theta == Catch::Approx(1.0).margin(0.05));
  CHECK(params.hazard.theta == 1.0);
}

TEST_CASE("model parameter guards") {
  ModelParams params;
  params.p = 0.5;
  params.sigma = 1.0;
  params.n_pop = 1;
  params.hazard = HazardModel::quadratic_hazard(1.0, 0.0);
  params.penalty = PenaltyModel::civil(1.0);
  CHECK_NOTHROW(params.check());
  CHECK(params.q() * params.p == Catch::Approx(1.0 - params.p).margin(1e-15));

  params.p = 1.2;
  CHECK_THROWS_AS(params.check(), std::invalid_argument);
  params.p = 0.5;
  params.n_pop = 0;
  CHECK_THROWS_AS(params.check(), std::invalid_argument);

  const Strategy backwards{1.0, 2.0};
  CHECK_THROWS_AS(backwards.check(), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyModel::civil(0.5), std::invalid_argument);
  CHECK_THROWS_AS(HazardModel::power_hazard(1.0, 0.5, 0.1), std::invalid_argument);
}
