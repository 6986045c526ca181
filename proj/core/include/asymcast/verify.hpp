#pragma once

#include "asymcast/types.hpp"

#include <string>
#include <vector>

namespace asymcast {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The three-car, three-model selection example: actuals and the forecasts
/// of M1..M3, as printed (two decimals).
struct SelectionExample {
  Vector actuals;
  std::vector<Vector> forecasts;
  std::vector<double> printed_mse;          // single models
  std::vector<double> printed_pair_mse;     // each model averaged with M3
};
const SelectionExample& selection_example();

/// Built-in self checks: the selection-example replay, loss identities,
/// the smooth QQC approximation and the percentage-difference arithmetic.
std::vector<CheckResult> run_builtin_checks();

}  // namespace asymcast
