#include "asymcast/ensemble.hpp"
#include "asymcast/errors.hpp"
#include "asymcast/loss.hpp"
#include "asymcast/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace asymcast;

namespace {

// Forecasts and actuals of the three-model worked example.
Vector actuals() { return Vector{{53.66, 45.36, 67.07}}; }
std::vector<Vector> stub() {
  return {Vector{{62.90, 35.76, 66.90}}, Vector{{65.63, 47.91, 65.63}}, Vector{{61.26, 38.92, 64.50}}};
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("worked example: selection trace under mse") {
  const auto e = ensemble_select(stub(), actuals(), CostSpec::squared_error());
  REQUIRE(e.trace.size() >= 2);
  const auto& first = e.trace[0].candidate_scores;
  CHECK(std::abs(first[0] - 59.19) < 0.01);
  CHECK(std::abs(first[1] - 50.62) < 0.01);
  CHECK(std::abs(first[2] - 35.28) < 0.01);  // 35.2795 from the stub values
  CHECK(e.trace[0].best_candidate == 2);
  CHECK(std::abs(e.trace[1].candidate_scores[0] - 45.70) < 0.01);
  CHECK(e.trace[1].best_candidate == 1);
  CHECK(e.trace[1].adopted);
  CHECK(e.members.front() == 2);
  CHECK(e.members[1] == 1);
  const auto w = e.weights(3);
  CHECK(w[0] == 0.0);
  CHECK(w[2] > w[1]);
  // Ensemble score never increases along the trace.
  for (std::size_t i = 1; i < e.trace.size(); ++i)
    CHECK(e.trace[i].ensemble_score <= e.trace[i - 1].ensemble_score);
}

TEST_CASE("matches an independent greedy selection") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 30;
    Vector y(n);
    for (auto& v : y) v = rng.normal();
    std::vector<Vector> preds;
    for (int m = 0; m < 6; ++m) {
      Vector p(n);
      const double bias = rng.normal(0, 0.3);
      for (Eigen::Index i = 0; i < n; ++i) p[i] = y[i] + bias + rng.normal(0, 0.5);
      preds.push_back(p);
    }
    const double a = 0.1 + 0.9 * rng.uniform();
    const auto e = ensemble_select(preds, y, CostSpec::qqc(a, 1));
    const auto o = oracle::greedy_select(preds, y, [&](const Vector& f) { return oracle::mean_qqc(a, 1, y, f); });
    CHECK(e.members == o);
  }
}

TEST_CASE("a model equal to the actuals is chosen alone") {
  const Vector y = actuals();
  auto preds = stub();
  preds.push_back(y);
  const auto e = ensemble_select(preds, y, CostSpec::qqc(0.3, 1));
  CHECK(e.members == std::vector<std::size_t>{3});
  CHECK(e.score() == 0.0);
}

TEST_CASE("single-model library") {
  const auto e = ensemble_select({stub()[0]}, actuals(), CostSpec::squared_error());
  CHECK(e.members == std::vector<std::size_t>{0});
  CHECK(e.weights(1) == std::vector<double>{1.0});
}

TEST_CASE("qqc with unit weights selects exactly as mse") {
  Rng rng(17);
  Vector y(50);
  for (auto& v : y) v = rng.uniform();
  std::vector<Vector> preds;
  for (int m = 0; m < 8; ++m) {
    Vector p = y;
    for (auto& v : p) v += rng.normal(0, 0.2);
    preds.push_back(p);
  }
  const auto a = ensemble_select(preds, y, CostSpec::squared_error());
  const auto b = ensemble_select(preds, y, CostSpec::qqc(1, 1));
  CHECK(a.members == b.members);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].candidate_scores == b.trace[i].candidate_scores);
}

TEST_CASE("ensemble forecast is the member average") {
  EnsembleModel e;
  e.members = {2, 1, 2};
  const Vector f = ensemble_predict(e, stub());
  CHECK(f[0] == doctest::Approx((61.26 * 2 + 65.63) / 3));
  EnsembleModel pair;
  pair.members = {1, 2};
  CHECK(ensemble_predict(pair, stub())[0] == doctest::Approx(63.445));
  CHECK(simple_average(stub())[1] == doctest::Approx((35.76 + 47.91 + 38.92) / 3));
}

TEST_CASE("trace csv") {
  const auto e = ensemble_select(stub(), actuals(), CostSpec::squared_error());
  std::ostringstream out;
  write_trace_csv(e, out);
  const std::string s = out.str();
  CHECK(s.rfind("iteration,candidate,score,adopted", 0) == 0);
  CHECK(s.find("\n0,3,") != std::string::npos);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(ensemble_select({}, actuals(), CostSpec::squared_error()), InvalidInputError);
  CHECK_THROWS_AS(ensemble_select({Vector::Zero(2)}, actuals(), CostSpec::squared_error()),
                  InvalidInputError);
}

}  // TEST_SUITE
