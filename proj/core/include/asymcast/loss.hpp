#pragma once

#include "asymcast/types.hpp"

#include <span>
#include <string>
#include <string_view>

namespace asymcast {

enum class LossFamily { SquaredError, LLC, QQC, LEC, Pinball, QQCApprox };

std::string_view family_name(LossFamily family) noexcept;
/// Accepts the names produced by family_name (case-insensitive). Throws ConfigError.
LossFamily parse_loss_family(std::string_view name);

/// Cost-of-error specification.
///
/// Residuals are e = actual - forecast, so e > 0 is underestimation and is
/// weighted by `a`; e <= 0 (overestimation) is weighted by `b`. `tau` is only
/// read by Pinball and `steepness` only by QQCApprox.
struct CostSpec {
  LossFamily family = LossFamily::SquaredError;
  double a = 1.0;
  double b = 1.0;
  double tau = 0.5;
  double steepness = 99.0;

  static CostSpec squared_error() { return {}; }
  static CostSpec llc(double a, double b) { return {LossFamily::LLC, a, b}; }
  static CostSpec qqc(double a, double b) { return {LossFamily::QQC, a, b}; }
  static CostSpec lec(double a, double b) { return {LossFamily::LEC, a, b}; }
  static CostSpec pinball(double tau) { return {LossFamily::Pinball, 1.0, 1.0, tau}; }
  static CostSpec qqc_approx(double a, double b, double steepness = 99.0) {
    return {LossFamily::QQCApprox, a, b, 0.5, steepness};
  }

  /// Throws ConfigError when a parameter read by `family` is out of range.
  void validate() const;

  bool operator==(const CostSpec&) const = default;
};

/// C(e) for the selected family. Throws InvalidInputError on non-finite `e`.
double eval_loss(const CostSpec& spec, double e);

/// Mean of C(y_i - f_i).
double eval_mean(const CostSpec& spec, std::span<const double> actuals,
                 std::span<const double> forecasts);

inline double eval_mean(const CostSpec& spec, const Vector& actuals, const Vector& forecasts) {
  return eval_mean(spec, view(actuals), view(forecasts));
}

/// dC/de. At the kink of LLC and Pinball (e = 0) the right-derivative is returned.
double grad_loss(const CostSpec& spec, double e);

/// Quantile level whose pinball loss is proportional to LLC(a, b): a / (a + b).
double tau_from_weights(double a, double b);

/// Checks C(0) = 0, C(e) > 0 off zero, and that C does not decrease as |e|
/// grows on either side of zero, over the given grid. Parameters are used as
/// given (no validation), so a malformed spec simply reports false.
bool validate_generalized_cost(const CostSpec& spec, std::span<const double> grid);

namespace detail {
// Unchecked kernels shared by the trainers; callers guarantee a valid spec.
double loss_unchecked(const CostSpec& spec, double e) noexcept;
double grad_unchecked(const CostSpec& spec, double e) noexcept;
}  // namespace detail

/// "key = value" lines (family, a, b, tau, steepness). Numbers are written in
/// shortest round-trip form, so parse_cost_spec(to_config_block(s)) == s.
std::string to_config_block(const CostSpec& spec);
CostSpec parse_cost_spec(std::string_view block);

}  // namespace asymcast
