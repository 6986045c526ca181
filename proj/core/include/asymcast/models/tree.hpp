#pragma once

#include "asymcast/models/model.hpp"
#include "asymcast/random.hpp"

#include <span>
#include <vector>

namespace asymcast {

/// CART-style regression tree stored as a flat node array.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  /// Grows a tree on `sample` (row indices into features, repeats allowed)
  /// by greedy variance reduction. With `mtry` < m, each split considers a
  /// random subset of `mtry` features drawn from `rng`; with mtry == m, `rng`
  /// is never touched.
  static RegressionTree grow(const Matrix& features, const Vector& target,
                             std::span<const std::size_t> sample, const TreeParams& params,
                             std::size_t mtry, Rng* rng);

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Vector predict(const Matrix& features) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const;

  void save(std::ostream& out) const;
  static RegressionTree load(std::istream& in);

 private:
  std::vector<Node> nodes_;
};

/// Average of one or more trees (one tree for a plain regression tree).
class TreeEnsembleRegressor final : public Regressor {
 public:
  explicit TreeEnsembleRegressor(std::vector<RegressionTree> trees);

  Vector predict(const Matrix& features) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const TreeEnsembleRegressor> load(std::istream& in);

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

Model fit_tree(const Matrix& features, const Vector& target, double complexity,
               std::size_t min_node);
Model fit_tree(const Matrix& features, const Vector& target, const TreeParams& params);

/// Bootstrap aggregation of trees; bag b draws from derive_seed(seed, b).
Model fit_bagged_tree(const Matrix& features, const Vector& target, std::size_t bags,
                      std::uint64_t seed, const TreeParams& params = {});

/// Bagging plus per-split feature subsampling. Tree t uses the same bootstrap
/// stream as bag t of fit_bagged_tree, so mtry == m reproduces bagging.
Model fit_random_forest(const Matrix& features, const Vector& target, std::size_t trees,
                        std::size_t mtry, std::uint64_t seed, const TreeParams& params = {});

}  // namespace asymcast
