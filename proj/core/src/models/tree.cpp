#include "asymcast/models/tree.hpp"

#include "asymcast/errors.hpp"
#include "serial.hpp"

#include <algorithm>
#include <numeric>

namespace asymcast {

namespace {

// Working state for growing one tree. Every feature keeps its own ordering of
// the sample slots; a node owns the same slot range [begin, end) in each.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& features, const Vector& target, std::span<const std::size_t> sample,
              const TreeParams& params, std::size_t mtry, Rng* rng)
      : x_(features), params_(params), mtry_(mtry), rng_(rng),
        m_(static_cast<std::size_t>(features.cols())), n_(sample.size()) {
    rows_.assign(sample.begin(), sample.end());
    y_.resize(n_);
    for (std::size_t s = 0; s < n_; ++s) y_[s] = target[static_cast<Eigen::Index>(rows_[s])];
    sorted_.assign(m_, std::vector<std::uint32_t>(n_));
    for (std::size_t f = 0; f < m_; ++f) {
      auto& order = sorted_[f];
      std::iota(order.begin(), order.end(), std::uint32_t{0});
      const auto col = static_cast<Eigen::Index>(f);
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = x_(static_cast<Eigen::Index>(rows_[a]), col);
        const double vb = x_(static_cast<Eigen::Index>(rows_[b]), col);
        return va < vb || (va == vb && a < b);
      });
    }
    go_left_.assign(n_, 0);
    scratch_.resize(n_);
    features_.resize(m_);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  std::vector<RegressionTree::Node> run() {
    double sum = 0.0, sq = 0.0;
    for (double v : y_) {
      sum += v;
      sq += v * v;
    }
    root_sse_ = sq - sum * sum / static_cast<double>(n_);
    grow(0, n_, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    double gain = 0.0;
    std::size_t feature = 0;
    std::size_t position = 0;  // left child is [begin, begin + position)
    double threshold = 0.0;
  };

  double value_at(std::size_t f, std::uint32_t slot) const {
    return x_(static_cast<Eigen::Index>(rows_[slot]), static_cast<Eigen::Index>(f));
  }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t count = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[sorted_[0][i]];
    nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(count);

    if (depth >= params_.max_depth || count < 2 * std::max<std::size_t>(1, params_.min_node)) {
      return id;
    }
    const Split best = find_split(begin, end, sum);
    const double min_gain = std::max(params_.complexity * root_sse_, 1e-12 * (1.0 + root_sse_));
    if (best.gain <= min_gain) return id;

    // Partition every feature's ordering stably around the chosen split.
    const auto& chosen = sorted_[best.feature];
    for (std::size_t i = begin; i < end; ++i) go_left_[chosen[i]] = i < begin + best.position;
    for (std::size_t f = 0; f < m_; ++f) {
      auto& order = sorted_[f];
      std::size_t l = begin, r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        if (go_left_[order[i]]) order[l++] = order[i];
        else scratch_[r++] = order[i];
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                order.begin() + static_cast<std::ptrdiff_t>(l));
    }
    const std::size_t mid = begin + best.position;
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  Split find_split(std::size_t begin, std::size_t end, double total) {
    const std::size_t count = end - begin;
    const std::size_t min_child = std::max<std::size_t>(1, params_.min_node);
    std::size_t candidates = m_;
    if (mtry_ < m_) {
      // Partial Fisher-Yates: the first mtry entries become the sample.
      for (std::size_t i = 0; i < mtry_; ++i) {
        const auto j = i + static_cast<std::size_t>(rng_->below(m_ - i));
        std::swap(features_[i], features_[j]);
      }
      candidates = mtry_;
    }
    Split best;
    const double base = total * total / static_cast<double>(count);
    // Evaluate candidates in ascending feature order so ties resolve the same
    // way regardless of sampling order.
    std::vector<std::size_t> feats(features_.begin(),
                                   features_.begin() + static_cast<std::ptrdiff_t>(candidates));
    std::sort(feats.begin(), feats.end());
    for (const auto f : feats) {
      const auto& order = sorted_[f];
      double left_sum = 0.0;
      for (std::size_t k = 1; k < count; ++k) {
        left_sum += y_[order[begin + k - 1]];
        if (k < min_child || count - k < min_child) continue;
        const double lo = value_at(f, order[begin + k - 1]);
        const double hi = value_at(f, order[begin + k]);
        if (!(lo < hi)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(count - k) - base;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.position = k;
          best.threshold = lo + 0.5 * (hi - lo);
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  TreeParams params_;
  std::size_t mtry_;
  Rng* rng_;
  std::size_t m_;
  std::size_t n_;
  std::vector<std::size_t> rows_;
  std::vector<double> y_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<char> go_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::size_t> features_;
  std::vector<RegressionTree::Node> nodes_;
  double root_sse_ = 0.0;
};

std::vector<std::size_t> bootstrap(std::size_t n, Rng& rng) {
  std::vector<std::size_t> sample(n);
  for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
  return sample;
}

void check_inputs(const Matrix& features, const Vector& target, const char* who) {
  if (features.rows() != target.size() || features.rows() == 0) {
    throw InvalidInputError(std::string(who) + ": feature rows and target length differ or are empty");
  }
  if (features.cols() == 0) throw InvalidInputError(std::string(who) + ": no feature columns");
}

}  // namespace

RegressionTree RegressionTree::grow(const Matrix& features, const Vector& target,
                                    std::span<const std::size_t> sample, const TreeParams& params,
                                    std::size_t mtry, Rng* rng) {
  const auto m = static_cast<std::size_t>(features.cols());
  if (mtry == 0 || mtry > m) {
    throw ConfigError("tree: mtry must be in [1, " + std::to_string(m) + "], got " +
                      std::to_string(mtry));
  }
  if (mtry < m && rng == nullptr) throw ConfigError("tree: feature subsampling needs a generator");
  if (sample.empty()) throw InvalidInputError("tree: empty sample");
  RegressionTree tree;
  tree.nodes_ = TreeBuilder(features, target, sample, params, mtry, rng).run();
  return tree;
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const auto& node = nodes_[id];
    id = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes_[id].value;
}

Vector RegressionTree::predict(const Matrix& features) const {
  Vector out(features.rows());
  for (Eigen::Index r = 0; r < features.rows(); ++r) out[r] = predict_row(features.row(r));
  return out;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

void RegressionTree::save(std::ostream& out) const {
  out << "tree " << nodes_.size() << '\n';
  for (const auto& n : nodes_) {
    out << n.feature << ' ' << text::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
        << ' ' << text::format_double(n.value) << '\n';
  }
}

RegressionTree RegressionTree::load(std::istream& in) {
  serial::expect(in, "tree");
  RegressionTree tree;
  tree.nodes_.resize(serial::read_size(in));
  for (auto& n : tree.nodes_) {
    n.feature = static_cast<int>(serial::read_int(in));
    n.threshold = serial::read_double(in);
    n.left = static_cast<int>(serial::read_int(in));
    n.right = static_cast<int>(serial::read_int(in));
    n.value = serial::read_double(in);
  }
  return tree;
}

TreeEnsembleRegressor::TreeEnsembleRegressor(std::vector<RegressionTree> trees)
    : trees_(std::move(trees)) {}

Vector TreeEnsembleRegressor::predict(const Matrix& features) const {
  Vector out = Vector::Zero(features.rows());
  for (const auto& t : trees_) out += t.predict(features);
  return out / static_cast<double>(trees_.size());
}

void TreeEnsembleRegressor::save(std::ostream& out) const {
  out << "trees " << trees_.size() << '\n';
  for (const auto& t : trees_) t.save(out);
}

std::shared_ptr<const TreeEnsembleRegressor> TreeEnsembleRegressor::load(std::istream& in) {
  serial::expect(in, "trees");
  std::vector<RegressionTree> trees(serial::read_size(in));
  for (auto& t : trees) t = RegressionTree::load(in);
  return std::make_shared<TreeEnsembleRegressor>(std::move(trees));
}

Model fit_tree(const Matrix& features, const Vector& target, const TreeParams& params) {
  check_inputs(features, target, "fit_tree");
  if (params.min_node == 0 || !(params.complexity >= 0.0)) {
    throw ConfigError("fit_tree: min_node must be positive and complexity non-negative");
  }
  std::vector<std::size_t> all(static_cast<std::size_t>(features.rows()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto tree = RegressionTree::grow(features, target, all, params,
                                   static_cast<std::size_t>(features.cols()), nullptr);
  std::vector<RegressionTree> trees;
  trees.push_back(std::move(tree));
  return Model(ModelSpec{params}, std::make_shared<TreeEnsembleRegressor>(std::move(trees)),
               static_cast<std::size_t>(features.cols()));
}

Model fit_tree(const Matrix& features, const Vector& target, double complexity,
               std::size_t min_node) {
  TreeParams params;
  params.complexity = complexity;
  params.min_node = min_node;
  return fit_tree(features, target, params);
}

Model fit_bagged_tree(const Matrix& features, const Vector& target, std::size_t bags,
                      std::uint64_t seed, const TreeParams& params) {
  check_inputs(features, target, "fit_bagged_tree");
  if (bags == 0) throw ConfigError("fit_bagged_tree: bags must be positive");
  const auto n = static_cast<std::size_t>(features.rows());
  const auto m = static_cast<std::size_t>(features.cols());
  std::vector<RegressionTree> trees;
  trees.reserve(bags);
  for (std::size_t b = 0; b < bags; ++b) {
    Rng rng(derive_seed(seed, b));
    const auto sample = bootstrap(n, rng);
    trees.push_back(RegressionTree::grow(features, target, sample, params, m, &rng));
  }
  return Model(ModelSpec{BaggedTreeParams{bags, params, seed}},
               std::make_shared<TreeEnsembleRegressor>(std::move(trees)), m);
}

Model fit_random_forest(const Matrix& features, const Vector& target, std::size_t trees,
                        std::size_t mtry, std::uint64_t seed, const TreeParams& params) {
  check_inputs(features, target, "fit_random_forest");
  const auto n = static_cast<std::size_t>(features.rows());
  const auto m = static_cast<std::size_t>(features.cols());
  if (trees == 0) throw ConfigError("fit_random_forest: trees must be positive");
  if (mtry == 0 || mtry > m) {
    throw ConfigError("fit_random_forest: mtry must be in [1, " + std::to_string(m) + "], got " +
                      std::to_string(mtry));
  }
  std::vector<RegressionTree> grown;
  grown.reserve(trees);
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(seed, t));
    const auto sample = bootstrap(n, rng);
    grown.push_back(RegressionTree::grow(features, target, sample, params, mtry, &rng));
  }
  return Model(ModelSpec{ForestParams{trees, mtry, params, seed}},
               std::make_shared<TreeEnsembleRegressor>(std::move(grown)), m);
}

}  // namespace asymcast
