#include "asymcast/verify.hpp"

#include "asymcast/ensemble.hpp"
#include "asymcast/experiment.hpp"
#include "asymcast/loss.hpp"
#include "asymcast/text.hpp"

#include <cmath>

namespace asymcast {

const SelectionExample& selection_example() {
  static const SelectionExample ex = [] {
    SelectionExample e;
    e.actuals = (Vector(3) << 53.66, 45.36, 67.07).finished();
    e.forecasts = {(Vector(3) << 62.90, 35.76, 66.90).finished(),
                   (Vector(3) << 65.63, 47.91, 65.63).finished(),
                   (Vector(3) << 61.26, 38.92, 64.50).finished()};
    e.printed_mse = {59.19, 50.62, 35.29};
    e.printed_pair_mse = {45.70, 34.53, 35.29};
    return e;
  }();
  return ex;
}

namespace {

// The printed forecasts are rounded to two decimals, which moves the recomputed
// MSEs by a few hundredths; the self check allows for that.
constexpr double kPrintedSlack = 0.05;

CheckResult selection_replay() {
  const auto& ex = selection_example();
  CheckResult r{"worked selection example", true, ""};
  const auto ens = ensemble_select(ex.forecasts, ex.actuals, CostSpec::squared_error());
  std::string detail;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      r.pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  };
  const auto& first = ens.trace.at(0).candidate_scores;
  for (std::size_t j = 0; j < 3; ++j) {
    expect(std::abs(first[j] - ex.printed_mse[j]) <= kPrintedSlack,
           "M" + std::to_string(j + 1) + " MSE " + text::format_fixed(first[j], 4));
  }
  expect(ens.members.front() == 2, "first pick is not M3");
  expect(ens.trace.size() > 1, "no second iteration");
  if (ens.trace.size() > 1) {
    const auto& second = ens.trace[1].candidate_scores;
    for (std::size_t j = 0; j < 3; ++j) {
      expect(std::abs(second[j] - ex.printed_pair_mse[j]) <= kPrintedSlack,
             "pair with M" + std::to_string(j + 1) + " MSE " + text::format_fixed(second[j], 4));
    }
    expect(ens.trace[1].adopted && ens.trace[1].best_candidate == 1, "M2 not adopted second");
  }
  const auto w = ens.weights(3);
  expect(w[0] == 0.0 && w[2] > w[1] && w[1] > 0.0, "final weights do not favour M3 over M2 with M1 excluded");
  for (std::size_t i = 1; i < ens.trace.size(); ++i) {
    expect(ens.trace[i].ensemble_score <= ens.trace[i - 1].ensemble_score, "trace score increased");
  }
  r.detail = r.pass ? "members " + std::to_string(ens.members.size()) + ", weights M2 " +
                          text::format_fixed(w[1], 4) + " M3 " + text::format_fixed(w[2], 4)
                    : detail;
  return r;
}

CheckResult loss_identities() {
  CheckResult r{"loss identities", true, ""};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double e = -5.0 + 10.0 * i / 999.0;
    worst = std::max(worst, std::abs(eval_loss(CostSpec::qqc(1, 1), e) - eval_loss(CostSpec::squared_error(), e)));
    for (int k = 1; k <= 10; ++k) {
      const double a = k / 10.0;
      const double lhs = eval_loss(CostSpec::llc(a, 1), e);
      const double rhs = (1.0 + a) * eval_loss(CostSpec::pinball(a / (1.0 + a)), e);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = "max deviation " + text::format_double(worst);
  return r;
}

CheckResult smooth_qqc() {
  CheckResult r{"smooth QQC approximation", true, ""};
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double a = k / 10.0;
    for (int i = 0; i <= 2000; ++i) {
      const double mag = 0.1 + 4.9 * i / 2000.0;
      for (double e : {mag, -mag}) {
        const double exact = eval_loss(CostSpec::qqc(a, 1), e);
        const double approx = eval_loss(CostSpec::qqc_approx(a, 1, 99), e);
        worst = std::max(worst, std::abs(approx - exact) / exact);
      }
    }
  }
  r.pass = worst < 1e-3;
  r.detail = "max relative gap " + text::format_double(worst);
  return r;
}

CheckResult percentage_differences() {
  CheckResult r{"percentage differences", true, ""};
  const auto first = pct_diff(44.60, 40.98);
  const auto second = pct_diff(22.88, 19.68);
  r.pass = first && second && std::abs(*first - 8.11) <= 0.01 && std::abs(*second - 14.0) <= 0.05 &&
           !pct_diff(0.0, 1.0);
  r.detail = (first ? text::format_fixed(*first, 4) : "NA") + "% and " +
             (second ? text::format_fixed(*second, 4) : "NA") + "%";
  return r;
}

}  // namespace

std::vector<CheckResult> run_builtin_checks() {
  return {selection_replay(), loss_identities(), smooth_qqc(), percentage_differences()};
}

}  // namespace asymcast
