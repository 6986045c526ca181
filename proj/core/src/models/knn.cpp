#include "asymcast/models/knn.hpp"

#include "asymcast/errors.hpp"
#include "serial.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace asymcast {

namespace {

constexpr std::size_t kLeafSize = 16;

using Candidate = std::pair<double, std::size_t>;  // (squared distance, row); compared lexicographically

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& q, const Matrix& points,
                        std::size_t row) {
  const auto col = points.col(static_cast<Eigen::Index>(row));
  double d = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double diff = q[j] - col[j];
    d += diff * diff;
  }
  return d;
}

}  // namespace

KnnRegressor::KnnRegressor(Matrix features, Vector target, std::size_t k, KnnAlgorithm algorithm)
    : points_(features.transpose()), target_(std::move(target)), k_(k), algorithm_(algorithm) {
  order_.resize(static_cast<std::size_t>(points_.cols()));
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (algorithm_ == KnnAlgorithm::KdTree && !order_.empty()) build(0, order_.size());
}

int KnnRegressor::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  // Split on the widest dimension at the median.
  int best_dim = -1;
  double best_spread = 0.0;
  for (Eigen::Index j = 0; j < points_.rows(); ++j) {
    double lo = points_(j, static_cast<Eigen::Index>(order_[begin]));
    double hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = points_(j, static_cast<Eigen::Index>(order_[i]));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(j);
    }
  }
  if (best_dim < 0) return id;  // all points identical

  const std::size_t mid = begin + (end - begin) / 2;
  const auto dim = static_cast<Eigen::Index>(best_dim);
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_(dim, static_cast<Eigen::Index>(a));
                     const double vb = points_(dim, static_cast<Eigen::Index>(b));
                     return va < vb || (va == vb && a < b);
                   });
  const double cut = points_(dim, static_cast<Eigen::Index>(order_[mid]));
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].dim = best_dim;
  nodes_[static_cast<std::size_t>(id)].cut = cut;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::size_t> KnnRegressor::neighbours(
    const Eigen::Ref<const Eigen::RowVectorXd>& query) const {
  const std::size_t n = order_.size();
  std::vector<Candidate> best;
  if (algorithm_ == KnnAlgorithm::BruteForce || nodes_.empty()) {
    best.reserve(n);
    for (std::size_t i = 0; i < n; ++i) best.emplace_back(squared_distance(query, points_, i), i);
    std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(k_), best.end());
    best.resize(k_);
  } else {
    std::priority_queue<Candidate> heap;  // max-heap: worst candidate on top
    // Explicit stack of (node, lower bound on squared distance).
    std::vector<std::pair<int, double>> stack{{0, 0.0}};
    while (!stack.empty()) {
      const auto [id, bound] = stack.back();
      stack.pop_back();
      if (heap.size() == k_ && bound > heap.top().first) continue;
      const Node& node = nodes_[static_cast<std::size_t>(id)];
      if (node.dim < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
          const Candidate c{squared_distance(query, points_, order_[i]), order_[i]};
          if (heap.size() < k_) {
            heap.push(c);
          } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
          }
        }
        continue;
      }
      const double diff = query[node.dim] - node.cut;
      const int near = diff < 0.0 ? node.left : node.right;
      const int far = diff < 0.0 ? node.right : node.left;
      // Points equal to the cut may sit on either side, so the far side bound
      // is the plain squared gap (zero when the query lies on the cut).
      stack.emplace_back(far, std::max(bound, diff * diff));
      stack.emplace_back(near, bound);
    }
    while (!heap.empty()) {
      best.push_back(heap.top());
      heap.pop();
    }
    std::sort(best.begin(), best.end());
  }
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (const auto& c : best) out.push_back(c.second);
  return out;
}

Vector KnnRegressor::predict(const Matrix& features) const {
  Vector out(features.rows());
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const auto idx = neighbours(features.row(r));
    double sum = 0.0;
    for (const auto i : idx) sum += target_[static_cast<Eigen::Index>(i)];
    out[r] = sum / static_cast<double>(idx.size());
  }
  return out;
}

void KnnRegressor::save(std::ostream& out) const {
  out << "knn " << k_ << ' ' << (algorithm_ == KnnAlgorithm::KdTree ? "kdtree" : "brute") << '\n';
  serial::write_matrix(out, points_.transpose());
  serial::write_vector(out, target_);
}

std::shared_ptr<const KnnRegressor> KnnRegressor::load(std::istream& in) {
  serial::expect(in, "knn");
  const auto k = serial::read_size(in);
  const auto algo = serial::next_token(in);
  Matrix features = serial::read_matrix(in);
  Vector target = serial::read_vector(in);
  return std::make_shared<KnnRegressor>(std::move(features), std::move(target), k,
                                        algo == "kdtree" ? KnnAlgorithm::KdTree
                                                         : KnnAlgorithm::BruteForce);
}

Model fit_knn(const Matrix& features, const Vector& target, std::size_t k_neighbors,
              KnnAlgorithm algorithm) {
  if (features.rows() != target.size()) {
    throw InvalidInputError("fit_knn: feature rows and target length differ");
  }
  if (k_neighbors == 0 || k_neighbors > static_cast<std::size_t>(features.rows())) {
    throw ConfigError("fit_knn: k_neighbors must be in [1, n], got " + std::to_string(k_neighbors) +
                      " with n=" + std::to_string(features.rows()));
  }
  auto state = std::make_shared<KnnRegressor>(features, target, k_neighbors, algorithm);
  return Model(ModelSpec{KnnParams{k_neighbors, algorithm}}, std::move(state),
               static_cast<std::size_t>(features.cols()));
}

}  // namespace asymcast
