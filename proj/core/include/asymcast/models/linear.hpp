#pragma once

#include "asymcast/models/model.hpp"

#include <span>
#include <string>

namespace asymcast {

/// Intercept first, then one coefficient per feature column.
struct LinearCoefficients {
  Vector beta;
};

class LinearRegressor final : public Regressor {
 public:
  explicit LinearRegressor(LinearCoefficients coefficients);

  Vector predict(const Matrix& features) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const LinearRegressor> load(std::istream& in);

  const LinearCoefficients& coefficients() const noexcept { return coef_; }

 private:
  LinearCoefficients coef_;
};

/// [1 | features].
Matrix with_intercept(const Matrix& features);

/// Ordinary least squares with intercept. Requires n > m + 1; a rank-deficient
/// design raises SingularDesignError naming the dependent columns (`names`
/// labels the feature columns; defaults are x1..xm).
Model fit_ols(const Matrix& features, const Vector& target,
              std::span<const std::string> names = {});

/// Ridge regression; the intercept is not penalized.
Model fit_ridge(const Matrix& features, const Vector& target, double lambda);

/// Throws InvalidInputError if `model` is not a linear model.
const LinearCoefficients& coefficients(const Model& model);

}  // namespace asymcast
