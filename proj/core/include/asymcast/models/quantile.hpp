#pragma once

#include "asymcast/models/linear.hpp"

namespace asymcast {

struct QuantileOptions {
  std::size_t max_iterations = 100;
  /// Relative duality gap at which the interior-point solver stops.
  double tolerance = 1e-12;
  /// Snap the interior solution to an optimal basic solution (p exactly
  /// fitted observations) when one is found with no loss in objective.
  bool vertex = true;
};

/// sum_i rho_tau(y_i - design_i' beta), `design` including the intercept column.
double quantile_objective(const Matrix& design, const Vector& target, const Vector& beta,
                          double tau);

/// Solves min_beta sum rho_tau(y - X beta) as a bounded-variable LP with a
/// Mehrotra predictor-corrector interior-point method on the dual
///   max y'a  s.t.  X'a = (1 - tau) X'1,  0 <= a <= 1.
/// Throws ConvergenceError (carrying the best objective) when the iteration
/// budget runs out.
LinearCoefficients solve_quantile(const Matrix& design, const Vector& target, double tau,
                                  const QuantileOptions& options = {});

/// Linear quantile regression with intercept. Requires n > m + 1.
Model fit_quantile(const Matrix& features, const Vector& target, double tau,
                   const QuantileOptions& options = {});

}  // namespace asymcast
