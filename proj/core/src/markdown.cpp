#include "asymcast/markdown.hpp"

#include "asymcast/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace asymcast {

namespace {

constexpr int kGridHalf = 50;  // grid step 0.01

double objective(const CostSpec& criterion, const Vector& f, const Vector& y, double md) {
  double sum = 0.0;
  const double factor = 1.0 - md;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    sum += detail::loss_unchecked(criterion, y[i] - f[i] * factor);
  }
  return sum / static_cast<double>(y.size());
}

}  // namespace

MarkdownFit fit_markdown(const Vector& forecasts, const Vector& actuals, const CostSpec& criterion) {
  criterion.validate();
  if (forecasts.size() != actuals.size() || forecasts.size() == 0) {
    throw InvalidInputError("fit_markdown: forecasts and actuals must be non-empty and equal length");
  }
  if (!actuals.allFinite()) throw InvalidInputError("fit_markdown: non-finite actual value");
  for (Eigen::Index i = 0; i < forecasts.size(); ++i) {
    if (!(forecasts[i] > 0.0) || !std::isfinite(forecasts[i])) {
      throw InvalidInputError("fit_markdown: forecast " + std::to_string(i) +
                              " is not strictly positive");
    }
  }
  auto phi = [&](double md) { return objective(criterion, forecasts, actuals, md); };

  MarkdownFit fit;
  fit.loss_at_zero = phi(0.0);
  int best = 0;
  double best_value = fit.loss_at_zero;
  double worst_value = best_value;
  for (int i = -kGridHalf; i <= kGridHalf; ++i) {
    const double value = phi(i / 100.0);
    worst_value = std::max(worst_value, value);
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  if (worst_value - best_value <= 1e-15 * (1.0 + std::abs(best_value))) {
    spdlog::warn("fit_markdown: objective is flat over [-0.5, 0.5]; using md = 0");
    fit.degenerate = true;
    fit.loss = fit.loss_at_zero;
    return fit;
  }

  double lo = std::max(kMarkdownLower, (best - 1) / 100.0);
  double hi = std::min(kMarkdownUpper, (best + 1) / 100.0);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = phi(x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double refined_value = phi(refined);
  if (refined_value < best_value) {
    fit.md = refined;
    fit.loss = refined_value;
  } else {
    fit.md = best / 100.0;
    fit.loss = best_value;
  }
  return fit;
}

Vector apply_markdown(const Vector& forecasts, double md) {
  if (!(md >= kMarkdownLower && md <= kMarkdownUpper)) {
    throw InvalidInputError("apply_markdown: md must lie in [-0.5, 0.5]");
  }
  return forecasts * (1.0 - md);
}

MarkdownModel::MarkdownModel(std::shared_ptr<const Forecaster> inner, double md, CostSpec criterion)
    : inner_(std::move(inner)), md_(md), criterion_(criterion) {
  if (!inner_) throw InvalidInputError("MarkdownModel: missing inner forecaster");
  if (!(md >= kMarkdownLower && md <= kMarkdownUpper)) {
    throw InvalidInputError("MarkdownModel: md must lie in [-0.5, 0.5]");
  }
}

Vector MarkdownModel::predict(const Matrix& features) const {
  return apply_markdown(inner_->predict(features), md_);
}

}  // namespace asymcast
