#pragma once

#include "asymcast/models/model.hpp"

#include <vector>

namespace asymcast {

/// k-nearest-neighbour regression: the mean target of the k training rows
/// closest in Euclidean distance. Equal distances are ordered by training row
/// index, so brute force and kd-tree search return the same neighbours.
class KnnRegressor final : public Regressor {
 public:
  KnnRegressor(Matrix features, Vector target, std::size_t k, KnnAlgorithm algorithm);

  Vector predict(const Matrix& features) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const KnnRegressor> load(std::istream& in);

  /// Indices of the k nearest training rows to `query`, nearest first.
  std::vector<std::size_t> neighbours(const Eigen::Ref<const Eigen::RowVectorXd>& query) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int dim = -1;                     // -1 for leaves
    double cut = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end);

  Matrix points_;  // row-major access via transpose: column i is training row i
  Vector target_;
  std::size_t k_;
  KnnAlgorithm algorithm_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Throws ConfigError if k is zero or exceeds the number of rows.
Model fit_knn(const Matrix& features, const Vector& target, std::size_t k_neighbors,
              KnnAlgorithm algorithm = KnnAlgorithm::KdTree);

}  // namespace asymcast
