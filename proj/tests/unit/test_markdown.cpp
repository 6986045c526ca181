#include "asymcast/errors.hpp"
#include "asymcast/loss.hpp"
#include "asymcast/markdown.hpp"
#include "asymcast/models/linear.hpp"
#include "asymcast/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <memory>

using namespace asymcast;

namespace {

struct Sample {
  Vector f, y;
};

Sample validation_set(Rng& rng, Eigen::Index n, double bias) {
  Sample s{Vector(n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.y[i] = 0.3 + 0.5 * rng.uniform();
    s.f[i] = s.y[i] * (1 + bias) + 0.04 * rng.normal();
  }
  return s;
}

}  // namespace

TEST_SUITE("markdown") {

TEST_CASE("fitted markdown agrees with a fine grid search") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 0.1 + 0.9 * rng.uniform();
    const auto s = validation_set(rng, 80, rng.uniform(-0.2, 0.2));
    const auto fit = fit_markdown(s.f, s.y, CostSpec::qqc(a, 1));
    const auto grid = oracle::markdown_grid(s.f, s.y, a, 1, 1e-6);
    CHECK(std::abs(fit.md - grid.md) < 1e-5);
    CHECK(fit.loss <= grid.loss + 1e-12);
    CHECK(fit.loss <= fit.loss_at_zero);
  }
}

TEST_CASE("markdown never makes validation loss worse") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = validation_set(rng, 20, rng.uniform(-0.4, 0.4));
    for (double a : {0.1, 0.5, 1.0}) {
      const auto fit = fit_markdown(s.f, s.y, CostSpec::qqc(a, 1));
      CHECK(fit.loss <= fit.loss_at_zero);
      CHECK(fit.md >= kMarkdownLower);
      CHECK(fit.md <= kMarkdownUpper);
    }
  }
}

TEST_CASE("unbiased forecasts under symmetric cost need no markdown") {
  Rng rng(5);
  const auto s = validation_set(rng, 2000, 0.0);
  const auto fit = fit_markdown(s.f, s.y, CostSpec::qqc(1, 1));
  CHECK(std::abs(fit.md) < 5e-3);
}

TEST_CASE("cheap underestimation marks forecasts down") {
  Rng rng(6);
  const auto s = validation_set(rng, 500, 0.0);
  CHECK(fit_markdown(s.f, s.y, CostSpec::qqc(0.2, 1)).md > 0.0);
}

TEST_CASE("already-optimal forecasts are a fixed point") {
  Rng rng(7);
  const auto s = validation_set(rng, 300, 0.05);
  const auto first = fit_markdown(s.f, s.y, CostSpec::qqc(0.4, 1));
  const auto again = fit_markdown(apply_markdown(s.f, first.md), s.y, CostSpec::qqc(0.4, 1));
  CHECK(std::abs(again.md) < 1e-6);
}

TEST_CASE("flat objective gives zero markdown") {
  // Forecasts so small that scaling them cannot move the residuals.
  const Vector f = Vector::Constant(5, 1e-200);
  const Vector y = Vector::Constant(5, 0.5);
  const auto fit = fit_markdown(f, y, CostSpec::qqc(0.3, 1));
  CHECK(fit.md == 0.0);
  CHECK(fit.degenerate);
}

TEST_CASE("apply and wrap") {
  CHECK(apply_markdown(Vector::Constant(2, 2.0), 0.25)[0] == doctest::Approx(1.5));
  CHECK_THROWS_AS(apply_markdown(Vector::Constant(2, 2.0), 0.75), InvalidInputError);
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  Vector y(4);
  y << 0.2, 0.4, 0.61, 0.79;
  auto inner = std::make_shared<Model>(fit_ols(x.topRows(4), y));
  MarkdownModel m(inner, 0.1, CostSpec::qqc(0.5, 1));
  CHECK((m.predict(x) - 0.9 * inner->predict(x)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(fit_markdown(Vector::Ones(3), Vector::Ones(2), CostSpec::qqc(0.5, 1)));
  CHECK_THROWS_AS(fit_markdown(Vector::Zero(3), Vector::Ones(3), CostSpec::qqc(0.5, 1)), InvalidInputError);
}

}  // TEST_SUITE
