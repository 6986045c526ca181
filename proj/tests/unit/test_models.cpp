#include "asymcast/errors.hpp"
#include "asymcast/models/knn.hpp"
#include "asymcast/models/linear.hpp"
#include "asymcast/models/model.hpp"
#include "asymcast/models/neural_net.hpp"
#include "asymcast/models/quantile.hpp"
#include "asymcast/models/tree.hpp"
#include "asymcast/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace asymcast;

namespace {

struct Problem {
  Matrix x;
  Vector y;
};

// y = 1 + 2 x0 - x1 + 0.5 x2 + noise
Problem linear_problem(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  Problem p{Matrix(n, 3), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int c = 0; c < 3; ++c) p.x(r, c) = rng.normal();
    p.y[r] = 1 + 2 * p.x(r, 0) - p.x(r, 1) + 0.5 * p.x(r, 2) + noise * rng.normal();
  }
  return p;
}

Problem step_problem(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Problem p{Matrix(n, 2), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    p.x(r, 0) = rng.uniform();
    p.x(r, 1) = rng.uniform();
    p.y[r] = (p.x(r, 0) > 0.5 ? 1.0 : 0.0) + (p.x(r, 1) > 0.3 ? 0.5 : 0.0) + 0.05 * rng.normal();
  }
  return p;
}

NNConfig small_config(std::size_t k, double lambda = 1e-4) {
  NNConfig c;
  c.hidden_nodes = k;
  c.lambda1 = c.lambda2 = lambda;
  c.epochs = 150;
  c.seed = 3;
  return c;
}

double variance(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_SUITE("models.linear") {

TEST_CASE("ols matches the normal equations") {
  const auto p = linear_problem(200, 11);
  const Vector beta = coefficients(fit_ols(p.x, p.y)).beta;
  const Vector oracle_beta = oracle::normal_equations(with_intercept(p.x), p.y);
  CHECK((beta - oracle_beta).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(beta[1] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("ols names dependent columns") {
  auto p = linear_problem(50, 3);
  p.x.col(2) = 2.0 * p.x.col(0);
  const std::vector<std::string> names = {"age", "mileage", "age2"};
  try {
    fit_ols(p.x, p.y, names);
    FAIL("expected a singular design");
  } catch (const SingularDesignError& e) {
    CHECK(!e.columns().empty());
    const bool named = std::find(e.columns().begin(), e.columns().end(), "age") != e.columns().end() ||
                       std::find(e.columns().begin(), e.columns().end(), "age2") != e.columns().end();
    CHECK(named);
  }
}

TEST_CASE("ridge with zero penalty is ols") {
  const auto p = linear_problem(120, 5);
  const Vector ols = coefficients(fit_ols(p.x, p.y)).beta;
  const Vector ridge = coefficients(fit_ridge(p.x, p.y, 0.0)).beta;
  CHECK((ols - ridge).cwiseAbs().maxCoeff() < 1e-9);
  // Shrinkage grows with lambda.
  const double n1 = coefficients(fit_ridge(p.x, p.y, 1.0)).beta.tail(3).norm();
  const double n2 = coefficients(fit_ridge(p.x, p.y, 100.0)).beta.tail(3).norm();
  CHECK(n2 < n1);
  CHECK(n1 < ols.tail(3).norm());
  CHECK_THROWS_AS(fit_ridge(p.x, p.y, -1.0), ConfigError);
}

TEST_CASE("wrong column count at predict time") {
  const auto p = linear_problem(40, 1);
  const Model m = fit_ols(p.x, p.y);
  CHECK_THROWS_AS(m.predict(Matrix::Zero(3, 2)), InvalidInputError);
}

}  // TEST_SUITE

TEST_SUITE("models.quantile") {

TEST_CASE("intercept-only fit lands in the sample quantile set") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.below(30);
    const double tau = 0.05 + 0.9 * rng.uniform();
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& v : y) v = std::round(rng.normal() * 100) / 10;  // ties on purpose
    const Matrix design = Matrix::Ones(static_cast<Eigen::Index>(n), 1);
    const double q = solve_quantile(design, y, tau).beta[0];
    const auto [lo, hi] = oracle::quantile_minimizer_set({y.data(), y.data() + y.size()}, tau);
    CHECK(q >= lo - 1e-9);
    CHECK(q <= hi + 1e-9);
  }
}

TEST_CASE("two-parameter objective agrees with enumeration and perturbation") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 25;
    Matrix x(n, 1);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform(-1, 1);
      y[i] = 0.3 + 0.8 * x(i, 0) + 0.4 * rng.normal();
    }
    const double tau = 0.1 + 0.8 * rng.uniform();
    const Matrix design = with_intercept(x);
    const Vector beta = coefficients(fit_quantile(x, y, tau)).beta;
    const double ours = oracle::qr_objective(design, y, beta, tau);
    CHECK(std::abs(ours - oracle::qr_vertex_min(design, y, tau)) <= 1e-6);
    const double pert = oracle::perturbation_min_2d(
        [&](double b0, double b1) { return oracle::qr_objective(design, y, Vector{{b0, b1}}, tau); },
        beta[0], beta[1], 0.5);
    CHECK(ours <= pert + 1e-6);
    CHECK(quantile_objective(design, y, beta, tau) == doctest::Approx(ours));
  }
}

TEST_CASE("median regression is least absolute deviations") {
  const auto p = linear_problem(60, 19, 0.3);
  const Vector lad = coefficients(fit_quantile(p.x.leftCols(1), p.y, 0.5)).beta;
  const Matrix design = with_intercept(p.x.leftCols(1));
  double sad = (p.y - design * lad).cwiseAbs().sum();
  CHECK(0.5 * sad == doctest::Approx(oracle::qr_vertex_min(design, p.y, 0.5)).epsilon(1e-9));
}

TEST_CASE("higher tau shifts the fit upwards") {
  const auto p = linear_problem(300, 8, 0.5);
  const Vector lo = fit_quantile(p.x, p.y, 0.2).predict(p.x);
  const Vector hi = fit_quantile(p.x, p.y, 0.8).predict(p.x);
  CHECK((hi - lo).mean() > 0.2);
  CHECK_THROWS_AS(fit_quantile(p.x, p.y, 1.0), ConfigError);
}

}  // TEST_SUITE

TEST_SUITE("models.knn") {

TEST_CASE("k = n predicts the training mean") {
  const auto p = linear_problem(40, 2);
  const Model m = fit_knn(p.x, p.y, 40);
  const Vector pred = m.predict(p.x.topRows(5));
  for (auto v : pred) CHECK(v == doctest::Approx(p.y.mean()));
}

TEST_CASE("kd-tree and brute force agree") {
  const auto p = linear_problem(500, 4);
  const auto q = linear_problem(100, 5);
  for (std::size_t k : {1, 3, 10, 40}) {
    const Vector a = fit_knn(p.x, p.y, k, KnnAlgorithm::KdTree).predict(q.x);
    const Vector b = fit_knn(p.x, p.y, k, KnnAlgorithm::BruteForce).predict(q.x);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("1-nn reproduces training targets") {
  const auto p = linear_problem(50, 9);
  CHECK((fit_knn(p.x, p.y, 1).predict(p.x) - p.y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(fit_knn(p.x, p.y, 0));
  CHECK_THROWS(fit_knn(p.x, p.y, 51));
}

}  // TEST_SUITE

TEST_SUITE("models.tree") {

TEST_CASE("a deep tree recovers a step function") {
  const auto p = step_problem(400, 1);
  const Model t = fit_tree(p.x, p.y, 0.0, 5);
  const double mse = (t.predict(p.x) - p.y).squaredNorm() / 400;
  CHECK(mse < 0.01);
  Matrix probe(2, 2);
  probe << 0.9, 0.9, 0.1, 0.1;
  const Vector v = t.predict(probe);
  CHECK(v[0] == doctest::Approx(1.5).epsilon(0.1));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(0.1).scale(1));
}

TEST_CASE("complexity and min node size prune the tree") {
  const auto p = step_problem(400, 2);
  const auto leaves = [&](double cp, std::size_t min_node) {
    return fit_tree(p.x, p.y, cp, min_node).state_as<TreeEnsembleRegressor>()->trees()[0].leaf_count();
  };
  CHECK(leaves(0.1, 5) <= 4);
  CHECK(leaves(0.0, 50) < leaves(0.0, 5));
  CHECK(leaves(0.5, 5) <= leaves(0.01, 5));
}

TEST_CASE("one-tree forest with all features equals one-bag bagging") {
  const auto p = linear_problem(150, 6);
  const Model rf = fit_random_forest(p.x, p.y, 1, 3, 99);
  const Model bag = fit_bagged_tree(p.x, p.y, 1, 99);
  CHECK((rf.predict(p.x) - bag.predict(p.x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bagging lowers prediction variance across seeds") {
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto p = linear_problem(120, 100 + s, 0.8);
    Matrix probe = Matrix::Zero(1, 3);
    std::vector<double> single, bagged;
    for (std::uint64_t r = 0; r < 15; ++r) {
      // Single trees on bootstrap resamples versus a 25-bag average.
      single.push_back(fit_bagged_tree(p.x, p.y, 1, 1000 * s + r).predict(probe)[0]);
      bagged.push_back(fit_bagged_tree(p.x, p.y, 25, 1000 * s + r).predict(probe)[0]);
    }
    if (variance(bagged) < variance(single)) ++wins;
  }
  CHECK(wins >= 8);
}

TEST_CASE("forest validation") {
  const auto p = linear_problem(50, 1);
  CHECK_THROWS_AS(fit_random_forest(p.x, p.y, 5, 0, 1), ConfigError);
  CHECK_THROWS_AS(fit_random_forest(p.x, p.y, 5, 4, 1), ConfigError);
  // Same seed reproduces exactly.
  CHECK((fit_random_forest(p.x, p.y, 5, 2, 7).predict(p.x) -
         fit_random_forest(p.x, p.y, 5, 2, 7).predict(p.x)).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

TEST_SUITE("models.nn") {

TEST_CASE("zero weights evaluate by hand") {
  NNWeights w;
  w.w = Matrix::Zero(2, 3);
  w.hidden_bias = Vector::Zero(2);
  w.v = Vector::Constant(2, 0.5);
  w.v0 = 0.25;
  // Each logistic unit outputs 0.5, so f = 0.25 + 2 * 0.5 * 0.5.
  const Vector f = w.forward(Matrix::Random(4, 3));
  for (auto v : f) CHECK(v == doctest::Approx(0.75));
  w.activation = Activation::Tanh;
  for (auto v : w.forward(Matrix::Random(4, 3))) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("pack and unpack are inverse") {
  NNWeights w;
  w.w = Matrix::Random(3, 4);
  w.hidden_bias = Vector::Random(3);
  w.v = Vector::Random(3);
  w.v0 = 0.7;
  NNWeights u = w;
  u.unpack(w.pack());
  CHECK(u.pack() == w.pack());
  CHECK(w.parameter_count() == 3 * 4 + 3 + 3 + 1);
}

TEST_CASE("objective gradient matches finite differences") {
  const auto p = linear_problem(60, 12);
  Rng rng(5);
  const std::vector<LossMode> losses = {LossMode::symmetric(), LossMode::pinball(0.3, 0.05),
                                        LossMode::qqc_approx(0.4, 1.0, 99)};
  for (auto act : {Activation::Logistic, Activation::Tanh})
    for (const auto& loss : losses) {
      NNConfig cfg = small_config(3, 1e-2);
      cfg.activation = act;
      NNWeights w;
      w.activation = act;
      w.w = Matrix(3, 3);
      for (auto& v : w.w.reshaped()) v = 0.5 * rng.normal();
      w.hidden_bias = Vector(3);
      for (auto& v : w.hidden_bias) v = 0.3 * rng.normal();
      w.v = Vector(3);
      for (auto& v : w.v) v = 0.5 * rng.normal();
      w.v0 = 0.1;
      w.y_offset = p.y.mean();
      w.y_scale = 2.0;
      const Vector g = nn_gradient(w, p.x, p.y, cfg, loss);
      const Vector fd = oracle::gradient_fd(
          [&](const Vector& theta) {
            NNWeights t = w;
            t.unpack(theta);
            return nn_objective(t, p.x, p.y, cfg, loss);
          },
          w.pack(), 1e-6);
      const double rel = (g - fd).norm() / std::max(1e-12, fd.norm());
      CHECK(rel < 1e-4);
    }
}

TEST_CASE("one hidden unit on symmetric loss is close to ols") {
  // Linear ground truth; both models scored on held-out rows.
  const auto train = linear_problem(2000, 21, 0.5);
  const auto valid = linear_problem(2000, 22, 0.5);
  for (auto act : {Activation::Tanh, Activation::Logistic}) {
    NNConfig cfg = small_config(1, 1e-6);
    cfg.activation = act;
    cfg.epochs = 300;
    const Model nn = fit_nn(train.x, train.y, cfg, LossMode::symmetric());
    const double nn_mse = (nn.predict(valid.x) - valid.y).squaredNorm();
    const double ols_mse = (fit_ols(train.x, train.y).predict(valid.x) - valid.y).squaredNorm();
    CHECK(nn_mse <= 1.10 * ols_mse);
  }
}

TEST_CASE("pinball net at tau 0.5 fits the median of a constant target") {
  Rng rng(8);
  const Eigen::Index n = 400;
  Matrix x(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y[i] = 1.0 + (rng.bernoulli(0.5) ? 1.0 : -1.0) * std::abs(rng.normal()) * 0.3 +
           (rng.bernoulli(0.2) ? 1.5 : 0.0);  // skewed, mean above median
  }
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const Vector pred = fit_nn(x, y, small_config(2), LossMode::pinball(0.5)).predict(x);
  CHECK(std::abs(pred.mean() - median) < 0.05);
}

TEST_CASE("cheap positive residuals bias the smooth-qqc net downwards") {
  const auto p = linear_problem(400, 31, 0.4);
  const Vector sym = fit_nn(p.x, p.y, small_config(4), LossMode::symmetric()).predict(p.x);
  const Vector asym = fit_nn(p.x, p.y, small_config(4), LossMode::qqc_approx(0.2, 1.0)).predict(p.x);
  CHECK((asym - sym).mean() < 0.0);
  // Residuals of the asymmetric fit lean positive.
  CHECK((p.y - asym).mean() > 0.0);
}

TEST_CASE("stronger penalties shrink the weights") {
  const auto p = linear_problem(200, 41);
  const auto norm = [&](double lambda) {
    const Model m = fit_nn(p.x, p.y, small_config(4, lambda), LossMode::symmetric());
    return m.state_as<NeuralNetRegressor>()->weights().weight_norm();
  };
  const double a = norm(1e-5), b = norm(1e-2), c = norm(1.0);
  CHECK(b <= a);
  CHECK(c <= b);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto p = linear_problem(100, 51);
  const Vector a = fit_nn(p.x, p.y, small_config(3), LossMode::symmetric()).predict(p.x);
  const Vector b = fit_nn(p.x, p.y, small_config(3), LossMode::symmetric()).predict(p.x);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  NNConfig other = small_config(3);
  other.seed = 4;
  CHECK((fit_nn(p.x, p.y, other, LossMode::symmetric()).predict(p.x) - a).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("bad configurations are rejected") {
  const auto p = linear_problem(30, 1);
  NNConfig c = small_config(0);
  CHECK_THROWS_AS(fit_nn(p.x, p.y, c, LossMode::symmetric()), ConfigError);
  CHECK_THROWS_AS(fit_nn(p.x, p.y, small_config(2), LossMode::pinball(1.5)), ConfigError);
  NNConfig hot = small_config(2);
  hot.learning_rate = 1e300;
  CHECK_THROWS_AS(fit_nn(p.x, p.y, hot, LossMode::symmetric()), TrainingError);
}

}  // TEST_SUITE

TEST_SUITE("models.spec") {

TEST_CASE("spec strings round trip") {
  std::vector<ModelSpec> specs;
  specs.push_back({OlsParams{}});
  specs.push_back({RidgeParams{3.0}});
  specs.push_back({QuantileParams{0.25}});
  specs.push_back({KnnParams{7, KnnAlgorithm::BruteForce}});
  specs.push_back({TreeParams{0.002, 20, 10}});
  NeuralNetParams nn;
  nn.config.hidden_nodes = 8;
  nn.loss = LossMode::qqc_approx(0.3, 1.0);
  specs.push_back({nn});
  nn.loss = LossMode::pinball(0.1, 0.01);
  specs.push_back({nn});
  specs.push_back({BaggedTreeParams{25, {}, 17}});
  specs.push_back({ForestParams{50, 5, {}, 9}});
  specs.push_back({BaggedTreeParams{5, {}, 18446744073709551615ull}});
  for (const auto& s : specs) {
    CAPTURE(s.to_string());
    CHECK(parse_model_spec(s.to_string()) == s);
  }
  CHECK(ModelSpec{QuantileParams{}}.provenance() == Provenance::Asymmetric);
  CHECK(ModelSpec{nn}.provenance() == Provenance::Asymmetric);
  CHECK(ModelSpec{RidgeParams{}}.provenance() == Provenance::Symmetric);
}

TEST_CASE("unsupported families and keys are config errors") {
  CHECK_THROWS_AS(parse_model_spec("svr c=1"), ConfigError);
  CHECK_THROWS_AS(parse_model_spec("mars degree=2"), ConfigError);
  CHECK_THROWS_AS(parse_model_spec("ridge alpha=1"), ConfigError);
  CHECK_THROWS_AS(parse_model_family("boosted_tree"), ConfigError);
  CHECK(parse_model_family("rf") == ModelFamily::RandomForest);
}

TEST_CASE("save and load reproduce predictions") {
  const auto p = linear_problem(120, 61);
  NeuralNetParams nn;
  nn.config = small_config(3);
  nn.config.epochs = 20;
  const std::vector<ModelSpec> specs = {{OlsParams{}}, {RidgeParams{1}}, {QuantileParams{0.3}},
                                        {KnnParams{5, KnnAlgorithm::KdTree}}, {TreeParams{}},
                                        {nn}, {BaggedTreeParams{3, {}, 1}}, {ForestParams{3, 2, {}, 1}}};
  for (const auto& spec : specs) {
    const Model m = fit_model(spec, p.x, p.y);
    std::stringstream buf;
    save_model(m, buf);
    const Model back = load_model(buf);
    CHECK(back.spec() == spec);
    CHECK((back.predict(p.x) - m.predict(p.x)).cwiseAbs().maxCoeff() == 0.0);
  }
}

}  // TEST_SUITE
