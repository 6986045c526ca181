#pragma once

#include "asymcast/dataset.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace asymcast {

/// Per-column affine transform fitted on the actual training set only.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;
  /// Numeric columns with zero variance on the ATS; left unscaled.
  std::vector<std::size_t> constant_columns;
  /// Dummy columns; never transformed.
  std::vector<std::size_t> skipped_columns;

  Matrix apply(const Matrix& features) const;
};

FeatureScaler fit_scaler(const Dataset& training);

/// Hold-out protocol: 30% test, the remaining 70% split 4:3 into the actual
/// training set (ATS) and validation. `full_train` is ATS followed by
/// validation and is what final models are refit on.
struct DataSplits {
  Dataset ats;
  Dataset validation;
  Dataset test;
  Dataset full_train;
  std::uint64_t seed = 0;
  std::optional<FeatureScaler> scaler;
};

/// Seeded uniform shuffle, then slicing: test = floor(0.3 n), ATS =
/// floor(4/7 of the rest), validation takes the remainder. Needs n >= 10.
DataSplits split(const Dataset& data, std::uint64_t seed);

/// Standardizes numeric features of every partition with ATS statistics.
DataSplits standardize(const DataSplits& splits);

}  // namespace asymcast
