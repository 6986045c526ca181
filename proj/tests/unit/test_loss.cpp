#include "asymcast/errors.hpp"
#include "asymcast/loss.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace asymcast;

namespace {

std::vector<double> residual_grid(int n = 1000, double half = 2.0) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(-half + 2 * half * i / (n - 1));
  return g;
}

const std::vector<double> kLevels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("qqc with unit weights is squared error") {
  for (double e : residual_grid()) {
    CHECK(std::abs(eval_loss(CostSpec::qqc(1, 1), e) - eval_loss(CostSpec::squared_error(), e)) <=
          1e-12);
  }
}

TEST_CASE("llc is a rescaled pinball loss") {
  for (double a : kLevels)
    for (double e : residual_grid()) {
      const double lhs = eval_loss(CostSpec::llc(a, 1), e);
      const double rhs = (1 + a) * eval_loss(CostSpec::pinball(a / (1 + a)), e);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("closed forms match the textbook definitions") {
  for (double a : {0.22, 0.5, 1.0, 2.0})
    for (double b : {0.7, 1.0, 17.0})
      for (double e : residual_grid(101, 1.5)) {
        CHECK(eval_loss(CostSpec::qqc(a, b), e) == doctest::Approx(oracle::qqc(a, b, e)));
        CHECK(eval_loss(CostSpec::llc(a, b), e) == doctest::Approx(oracle::llc(a, b, e)));
        CHECK(eval_loss(CostSpec::lec(a, b), e) ==
              doctest::Approx(oracle::lec(a, b, e)).epsilon(1e-9).scale(1e-12));
      }
}

TEST_CASE("residual sign convention: positive e costs a, non-positive costs b") {
  CHECK(eval_loss(CostSpec::qqc(0.25, 1), 2.0) == doctest::Approx(1.0));
  CHECK(eval_loss(CostSpec::qqc(0.25, 1), -2.0) == doctest::Approx(4.0));
  CHECK(eval_loss(CostSpec::llc(0.25, 1), 0.0) == 0.0);
  CHECK(eval_mean(CostSpec::qqc(0.5, 1), Vector::Constant(1, 3.0), Vector::Constant(1, 1.0)) ==
        doctest::Approx(2.0));
}

TEST_CASE("smooth qqc tracks qqc away from zero") {
  for (double a : kLevels)
    for (double e : residual_grid(2001, 3.0)) {
      if (std::abs(e) < 0.1) continue;
      const double exact = eval_loss(CostSpec::qqc(a, 1), e);
      const double approx = eval_loss(CostSpec::qqc_approx(a, 1, 99), e);
      CHECK(std::abs(approx - exact) / exact < 1e-3);
    }
}

TEST_CASE("analytic gradients match central differences") {
  const std::vector<CostSpec> specs = {CostSpec::squared_error(), CostSpec::qqc(0.3, 1),
                                       CostSpec::lec(0.4, 2),     CostSpec::llc(0.3, 1),
                                       CostSpec::pinball(0.2),    CostSpec::qqc_approx(0.3, 1, 99)};
  for (const auto& spec : specs)
    for (double e : residual_grid(97, 1.3)) {
      if (std::abs(e) < 1e-3) continue;  // skip the kink
      const double fd = oracle::central_difference([&](double x) { return eval_loss(spec, x); }, e, 1e-6);
      const double g = grad_loss(spec, e);
      CHECK(std::abs(g - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("kinked losses report the right derivative at zero") {
  CHECK(grad_loss(CostSpec::pinball(0.3), 0.0) == doctest::Approx(0.3));
  CHECK(grad_loss(CostSpec::llc(0.3, 1), 0.0) == doctest::Approx(0.3));
}

TEST_CASE("tau from weights") {
  CHECK(tau_from_weights(1, 1) == doctest::Approx(0.5));
  CHECK(tau_from_weights(0.25, 1) == doctest::Approx(0.2));
  CHECK_THROWS_AS(tau_from_weights(0, 1), ConfigError);
}

TEST_CASE("invalid weights and residuals are rejected") {
  CHECK_THROWS_AS(eval_loss(CostSpec::qqc(0, 1), 1.0), ConfigError);
  CHECK_THROWS_AS(eval_loss(CostSpec::llc(-1, 1), 1.0), ConfigError);
  CHECK_THROWS_AS(eval_loss(CostSpec::pinball(1.0), 1.0), ConfigError);
  CHECK_THROWS_AS(eval_loss(CostSpec::qqc(1, 1), std::numeric_limits<double>::quiet_NaN()),
                  InvalidInputError);
  CHECK_THROWS_AS(eval_mean(CostSpec::qqc(1, 1), Vector(2), Vector(3)), InvalidInputError);
  CHECK_THROWS_AS(eval_mean(CostSpec::qqc(1, 1), Vector(0), Vector(0)), InvalidInputError);
}

TEST_CASE("generalized cost validator") {
  const auto grid = residual_grid(200, 1.0);  // even count: no exact zero
  std::vector<double> with_zero = grid;
  with_zero.push_back(0.0);
  for (auto spec : {CostSpec::qqc(0.3, 1), CostSpec::llc(0.5, 1), CostSpec::lec(0.22, 17)})
    CHECK(validate_generalized_cost(spec, with_zero));
  CHECK_FALSE(validate_generalized_cost(CostSpec::qqc(0.3, 1), grid));  // no zero point
}

TEST_CASE("cost spec text round trip") {
  for (auto spec : {CostSpec::qqc(0.3, 1), CostSpec::pinball(0.125), CostSpec::qqc_approx(0.7, 1.5, 50)}) {
    CHECK(parse_cost_spec(to_config_block(spec)) == spec);
  }
  CHECK(parse_loss_family("MSE") == LossFamily::SquaredError);
  CHECK_THROWS_AS(parse_loss_family("hinge"), ConfigError);
}

}  // TEST_SUITE
