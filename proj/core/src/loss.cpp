#include "asymcast/loss.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <cmath>
#include <sstream>

namespace asymcast {

namespace {

constexpr double kExpClamp = 700.0;

// 1 / (1 + exp(s * e)), clamped where exp would overflow.
double falling_logistic(double steepness, double e) noexcept {
  const double z = steepness * e;
  if (z > kExpClamp) return 0.0;
  if (z < -kExpClamp) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

void require_finite(double e) {
  if (!std::isfinite(e)) throw InvalidInputError("residual is not finite");
}

}  // namespace

std::string_view family_name(LossFamily family) noexcept {
  switch (family) {
    case LossFamily::SquaredError: return "squared_error";
    case LossFamily::LLC: return "llc";
    case LossFamily::QQC: return "qqc";
    case LossFamily::LEC: return "lec";
    case LossFamily::Pinball: return "pinball";
    case LossFamily::QQCApprox: return "qqc_approx";
  }
  return "unknown";
}

LossFamily parse_loss_family(std::string_view name) {
  const std::string key = text::lower(text::trim(name));
  for (auto f : {LossFamily::SquaredError, LossFamily::LLC, LossFamily::QQC, LossFamily::LEC,
                 LossFamily::Pinball, LossFamily::QQCApprox}) {
    if (key == family_name(f)) return f;
  }
  if (key == "mse") return LossFamily::SquaredError;
  throw ConfigError("unknown loss family '" + std::string(name) + "'");
}

void CostSpec::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  switch (family) {
    case LossFamily::SquaredError:
      return;
    case LossFamily::Pinball:
      if (!(std::isfinite(tau) && tau > 0.0 && tau < 1.0)) {
        throw ConfigError("pinball tau must lie in (0, 1), got " + text::format_double(tau));
      }
      return;
    case LossFamily::QQCApprox:
      if (!positive(steepness)) {
        throw ConfigError("qqc_approx steepness must be positive, got " +
                          text::format_double(steepness));
      }
      [[fallthrough]];
    case LossFamily::LLC:
    case LossFamily::QQC:
    case LossFamily::LEC:
      if (!positive(a) || !positive(b)) {
        throw ConfigError(std::string(family_name(family)) + " weights must be positive, got a=" +
                          text::format_double(a) + " b=" + text::format_double(b));
      }
      return;
  }
}

namespace detail {

double loss_unchecked(const CostSpec& s, double e) noexcept {
  switch (s.family) {
    case LossFamily::SquaredError:
      return e * e;
    case LossFamily::LLC:
      return e > 0.0 ? s.a * e : -s.b * e;
    case LossFamily::QQC:
      return (e > 0.0 ? s.a : s.b) * e * e;
    case LossFamily::LEC: {
      const double ae = s.a * e;
      // expm1 keeps precision for small a*e where exp(ae) - 1 cancels.
      return s.b * (std::expm1(ae) - ae);
    }
    case LossFamily::Pinball:
      return e > 0.0 ? s.tau * e : (s.tau - 1.0) * e;
    case LossFamily::QQCApprox: {
      const double weight = falling_logistic(s.steepness, e) * (s.b - s.a) + s.a;
      return e * e * weight;
    }
  }
  return 0.0;
}

double grad_unchecked(const CostSpec& s, double e) noexcept {
  switch (s.family) {
    case LossFamily::SquaredError:
      return 2.0 * e;
    case LossFamily::LLC:
      return e >= 0.0 ? s.a : -s.b;
    case LossFamily::QQC:
      return 2.0 * (e > 0.0 ? s.a : s.b) * e;
    case LossFamily::LEC:
      return s.b * s.a * std::expm1(s.a * e);
    case LossFamily::Pinball:
      return e >= 0.0 ? s.tau : s.tau - 1.0;
    case LossFamily::QQCApprox: {
      const double g = falling_logistic(s.steepness, e);
      const double weight = g * (s.b - s.a) + s.a;
      const double dg = -s.steepness * g * (1.0 - g);
      return 2.0 * e * weight + e * e * (s.b - s.a) * dg;
    }
  }
  return 0.0;
}

}  // namespace detail

double eval_loss(const CostSpec& spec, double e) {
  spec.validate();
  require_finite(e);
  return detail::loss_unchecked(spec, e);
}

double eval_mean(const CostSpec& spec, std::span<const double> actuals,
                 std::span<const double> forecasts) {
  spec.validate();
  if (actuals.empty()) throw InvalidInputError("eval_mean: empty input");
  if (actuals.size() != forecasts.size()) {
    throw InvalidInputError("eval_mean: " + std::to_string(actuals.size()) + " actuals vs " +
                            std::to_string(forecasts.size()) + " forecasts");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    const double e = actuals[i] - forecasts[i];
    require_finite(e);
    sum += detail::loss_unchecked(spec, e);
  }
  return sum / static_cast<double>(actuals.size());
}

double grad_loss(const CostSpec& spec, double e) {
  spec.validate();
  require_finite(e);
  return detail::grad_unchecked(spec, e);
}

double tau_from_weights(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0)) {
    throw ConfigError("tau_from_weights: weights must be positive");
  }
  return a / (a + b);
}

bool validate_generalized_cost(const CostSpec& spec, std::span<const double> grid) {
  bool has_zero = false;
  for (double e : grid) {
    if (!std::isfinite(e)) return false;
    const double c = detail::loss_unchecked(spec, e);
    if (!std::isfinite(c)) return false;
    if (e == 0.0) {
      has_zero = true;
      if (c != 0.0) return false;
    } else if (!(c > 0.0)) {
      return false;
    }
    for (double f : grid) {
      // Same side of zero and further out must cost at least as much.
      const bool same_side = (e > 0.0 && f > 0.0) || (e < 0.0 && f < 0.0);
      if (same_side && std::abs(f) > std::abs(e) && detail::loss_unchecked(spec, f) < c) {
        return false;
      }
    }
  }
  return has_zero;
}

std::string to_config_block(const CostSpec& spec) {
  std::ostringstream out;
  out << "family = " << family_name(spec.family) << '\n'
      << "a = " << text::format_double(spec.a) << '\n'
      << "b = " << text::format_double(spec.b) << '\n'
      << "tau = " << text::format_double(spec.tau) << '\n'
      << "steepness = " << text::format_double(spec.steepness) << '\n';
  return out.str();
}

CostSpec parse_cost_spec(std::string_view block) {
  CostSpec spec;
  bool saw_family = false;
  std::size_t line_no = 0;
  while (!block.empty()) {
    const auto nl = block.find('\n');
    const std::string_view line = text::trim(block.substr(0, nl));
    block = nl == std::string_view::npos ? std::string_view{} : block.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("cost spec line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = text::lower(text::trim(line.substr(0, eq)));
    const std::string_view value = text::trim(line.substr(eq + 1));
    if (key == "family") {
      spec.family = parse_loss_family(value);
      saw_family = true;
      continue;
    }
    const auto number = text::parse_double(value);
    if (!number) {
      throw ConfigError("cost spec line " + std::to_string(line_no) + ": '" + std::string(value) +
                        "' is not a number");
    }
    if (key == "a") spec.a = *number;
    else if (key == "b") spec.b = *number;
    else if (key == "tau") spec.tau = *number;
    else if (key == "steepness") spec.steepness = *number;
    else throw ConfigError("cost spec: unknown key '" + key + "'");
  }
  if (!saw_family) throw ConfigError("cost spec: missing 'family'");
  spec.validate();
  return spec;
}

}  // namespace asymcast
