#include "asymcast/split.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/random.hpp"

#include <cmath>
#include <numeric>

namespace asymcast {

Matrix FeatureScaler::apply(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != mean.size()) {
    throw InvalidInputError("scaler fitted on " + std::to_string(mean.size()) +
                            " columns applied to " + std::to_string(features.cols()));
  }
  Matrix out = features;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const auto j = static_cast<std::size_t>(c);
    out.col(c) = (out.col(c).array() - mean[j]) / scale[j];
  }
  return out;
}

FeatureScaler fit_scaler(const Dataset& training) {
  FeatureScaler s;
  const auto m = training.cols();
  s.mean.assign(m, 0.0);
  s.scale.assign(m, 1.0);
  const double n = static_cast<double>(training.rows());
  for (std::size_t j = 0; j < m; ++j) {
    if (training.categorical_map.is_dummy(j)) {
      s.skipped_columns.push_back(j);
      continue;
    }
    const auto col = training.features.col(static_cast<Eigen::Index>(j));
    const double mu = col.mean();
    const double var = n > 1 ? (col.array() - mu).square().sum() / (n - 1.0) : 0.0;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
      s.constant_columns.push_back(j);
      continue;
    }
    s.mean[j] = mu;
    s.scale[j] = sd;
  }
  return s;
}

DataSplits split(const Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (n < 10) throw InvalidInputError("split needs at least 10 rows, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }

  const std::size_t n_test = (3 * n) / 10;
  const std::size_t n_train = n - n_test;
  const std::size_t n_ats = (4 * n_train) / 7;

  const std::span<const std::size_t> all(order);
  DataSplits out;
  out.seed = seed;
  out.ats = data.subset(all.subspan(0, n_ats), Partition::Ats);
  out.validation = data.subset(all.subspan(n_ats, n_train - n_ats), Partition::Validation);
  out.test = data.subset(all.subspan(n_train), Partition::Test);
  out.full_train = concat(out.ats, out.validation, Partition::FullTrain);
  return out;
}

DataSplits standardize(const DataSplits& splits) {
  DataSplits out = splits;
  const FeatureScaler scaler = fit_scaler(splits.ats);
  out.ats.features = scaler.apply(splits.ats.features);
  out.validation.features = scaler.apply(splits.validation.features);
  out.test.features = scaler.apply(splits.test.features);
  out.full_train.features = scaler.apply(splits.full_train.features);
  out.scaler = scaler;
  return out;
}

}  // namespace asymcast
