#include "asymcast/synth.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/random.hpp"
#include "asymcast/text.hpp"

#include <algorithm>
#include <cmath>

namespace asymcast {

namespace {

// Encoded column layout.
enum Col : Eigen::Index {
  kAge,
  kDuration,
  kMileage,
  kCapacity,
  kHorsepower,
  kCustomization,
  kLacquer,
  kFourWheel,
  kDiesel,
  kHybrid,
  kAutomatic,
  kEstate,
  kSuv,
  kPremium,
  kNavigation,
  kColumns
};

constexpr double kTargetFloor = 0.02;
constexpr double kTargetCeil = 1.0;

CategoricalMap make_categorical_map() {
  CategoricalMap map;
  map.columns = {
      {"special_lacquer", {"no", "yes"}, {kLacquer}},
      {"four_wheel_drive", {"no", "yes"}, {kFourWheel}},
      {"fuel", {"petrol", "diesel", "hybrid"}, {kDiesel, kHybrid}},
      {"gear_shift", {"manual", "automatic"}, {kAutomatic}},
      {"body", {"sedan", "estate", "suv"}, {kEstate, kSuv}},
      {"segment", {"middle", "premium"}, {kPremium}},
      {"navigation", {"no", "yes"}, {kNavigation}},
  };
  return map;
}

std::vector<std::string> make_feature_names(const CategoricalMap& map) {
  std::vector<std::string> names = {"age",        "contract_duration", "mileage",
                                    "cubic_capacity", "horsepower", "customization"};
  names.resize(kColumns);
  for (const auto& cat : map.columns) {
    for (std::size_t l = 1; l < cat.levels.size(); ++l) {
      names[cat.dummy_columns[l - 1]] = cat.name + "=" + cat.levels[l];
    }
  }
  return names;
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 10) throw ConfigError("synth: n must be at least 10, got " + std::to_string(n));
  if (!(std::isfinite(noise_sd) && noise_sd > 0.0)) {
    throw ConfigError("synth: noise_sd must be positive, got " + text::format_double(noise_sd));
  }
  if (!std::isfinite(drift)) throw ConfigError("synth: drift must be finite");
}

double synth_ground_truth(const Eigen::Ref<const Eigen::RowVectorXd>& x, double drift,
                          double position) {
  const double age = x[kAge];
  const double mileage = x[kMileage];
  const double base = 0.92 + 0.03 * x[kPremium];
  double y = base * std::exp(-0.16 * age) * std::exp(-0.0025 * mileage);
  y += 0.03 * x[kLacquer] + 0.0015 * x[kCustomization];
  y += 0.04 * std::tanh((x[kHorsepower] - 160.0) / 40.0);
  y += 0.02 * x[kAutomatic] * x[kPremium];
  y += 0.02 * x[kFourWheel] * x[kSuv];
  y += 0.01 * x[kNavigation] - 0.004 * x[kHybrid] * age;
  y += 0.004 * x[kEstate] - 0.0004 * std::max(0.0, x[kDuration] - 36.0);
  if (x[kDiesel] != 0.0 && mileage > 100.0) y += 0.025;
  if (age > 4.0) y -= 0.05;  // successor model launched
  y += drift * (position - 0.5);
  return y;
}

Dataset synth_generate(const SynthConfig& config) {
  config.validate();
  Dataset out;
  out.categorical_map = make_categorical_map();
  out.feature_names = make_feature_names(out.categorical_map);
  const auto n = static_cast<Eigen::Index>(config.n);
  out.features = Matrix::Zero(n, kColumns);
  out.target.resize(n);
  out.row_ids.resize(config.n);

  constexpr double kCapacities[] = {1.4, 1.6, 2.0, 2.5, 3.0};
  Rng rng(config.seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto x = out.features.row(i);
    const double duration = 12.0 * static_cast<double>(1 + rng.below(4));
    const double age = duration / 12.0 + rng.uniform(0.0, 2.0);
    const double annual_km = 18.0 * std::exp(rng.normal(0.0, 0.35));  // thousand km
    const double capacity = kCapacities[rng.below(5)];
    x[kAge] = age;
    x[kDuration] = duration;
    x[kMileage] = age * annual_km;
    x[kCapacity] = capacity;
    x[kHorsepower] = std::round(20.0 + 70.0 * capacity + rng.normal(0.0, 15.0));
    x[kCustomization] = std::round(rng.uniform(0.0, 10.0) * 10.0) / 10.0;
    x[kLacquer] = rng.bernoulli(0.25) ? 1.0 : 0.0;
    x[kFourWheel] = rng.bernoulli(capacity >= 2.5 ? 0.5 : 0.2) ? 1.0 : 0.0;
    const double fuel = rng.uniform();
    x[kDiesel] = fuel >= 0.40 && fuel < 0.85 ? 1.0 : 0.0;
    x[kHybrid] = fuel >= 0.85 ? 1.0 : 0.0;
    x[kAutomatic] = rng.bernoulli(0.6) ? 1.0 : 0.0;
    const double body = rng.uniform();
    x[kEstate] = body >= 0.5 && body < 0.8 ? 1.0 : 0.0;
    x[kSuv] = body >= 0.8 ? 1.0 : 0.0;
    x[kPremium] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    x[kNavigation] = rng.bernoulli(0.5) ? 1.0 : 0.0;

    const double position = static_cast<double>(i) / static_cast<double>(n);
    const double truth = synth_ground_truth(x, config.drift, position);
    const double noise = rng.normal(0.0, config.noise_sd * (0.7 + 0.1 * age));
    out.target[i] = std::clamp(truth + noise, kTargetFloor, kTargetCeil);
    out.row_ids[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  }
  return out;
}

}  // namespace asymcast
