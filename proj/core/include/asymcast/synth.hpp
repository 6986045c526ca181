#pragma once

#include "asymcast/dataset.hpp"

#include <cstddef>
#include <cstdint>

namespace asymcast {

/// Settings for the synthetic car-resale generator.
///
/// The generator emits 15 encoded features (6 numeric, 9 dummies) and a
/// resale-to-list-price ratio in (0, 1] with a deliberately nonlinear ground
/// truth: exponential depreciation in age and mileage, a horsepower
/// saturation, interaction terms and two step discontinuities (a model
/// redesign after four years, a diesel high-mileage bonus).
struct SynthConfig {
  std::size_t n = 10000;
  std::uint64_t seed = 42;
  double noise_sd = 0.03;
  /// Linear shift of the target over row order (a sale-date proxy). 0 = stationary.
  double drift = 0.0;

  void validate() const;
};

Dataset synth_generate(const SynthConfig& config);

/// Noise-free target for one encoded feature row, matching synth_generate's
/// column order. `position` in [0, 1) only matters when drift != 0.
double synth_ground_truth(const Eigen::Ref<const Eigen::RowVectorXd>& row, double drift = 0.0,
                          double position = 0.0);

}  // namespace asymcast
