#pragma once

#include "asymcast/loss.hpp"
#include "asymcast/models/model.hpp"

#include <memory>

namespace asymcast {

inline constexpr double kMarkdownLower = -0.5;
inline constexpr double kMarkdownUpper = 0.5;

struct MarkdownFit {
  double md = 0.0;
  /// Mean criterion loss at md and at md = 0.
  double loss = 0.0;
  double loss_at_zero = 0.0;
  /// True when the objective was flat over the search interval (md forced to 0).
  bool degenerate = false;
};

/// Minimizes mean criterion loss of actuals - forecasts * (1 - md) over
/// md in [-0.5, 0.5]: a 101-point scan followed by golden-section refinement
/// around the best grid point. Forecasts must be strictly positive.
MarkdownFit fit_markdown(const Vector& forecasts, const Vector& actuals, const CostSpec& criterion);

/// forecasts * (1 - md).
Vector apply_markdown(const Vector& forecasts, double md);

/// Forecaster whose output is marked down by a fixed fraction.
class MarkdownModel final : public Forecaster {
 public:
  MarkdownModel(std::shared_ptr<const Forecaster> inner, double md, CostSpec criterion);

  Vector predict(const Matrix& features) const override;

  const Forecaster& inner() const noexcept { return *inner_; }
  double md() const noexcept { return md_; }
  const CostSpec& criterion() const noexcept { return criterion_; }

 private:
  std::shared_ptr<const Forecaster> inner_;
  double md_;
  CostSpec criterion_;
};

}  // namespace asymcast
