#include "asymcast/models/model.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/models/knn.hpp"
#include "asymcast/models/linear.hpp"
#include "asymcast/models/neural_net.hpp"
#include "asymcast/models/quantile.hpp"
#include "asymcast/models/tree.hpp"
#include "asymcast/text.hpp"
#include "serial.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace asymcast {

std::string_view model_family_name(ModelFamily family) noexcept {
  switch (family) {
    case ModelFamily::OLS: return "ols";
    case ModelFamily::Ridge: return "ridge";
    case ModelFamily::QuantileReg: return "quantile";
    case ModelFamily::KNN: return "knn";
    case ModelFamily::Tree: return "tree";
    case ModelFamily::NeuralNet: return "nn";
    case ModelFamily::BaggedTree: return "bagged_tree";
    case ModelFamily::RandomForest: return "random_forest";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  const auto key = text::lower(text::trim(name));
  static const std::map<std::string, ModelFamily, std::less<>> known = {
      {"ols", ModelFamily::OLS},
      {"linear", ModelFamily::OLS},
      {"ridge", ModelFamily::Ridge},
      {"quantile", ModelFamily::QuantileReg},
      {"qr", ModelFamily::QuantileReg},
      {"knn", ModelFamily::KNN},
      {"tree", ModelFamily::Tree},
      {"nn", ModelFamily::NeuralNet},
      {"neural_net", ModelFamily::NeuralNet},
      {"bagged_tree", ModelFamily::BaggedTree},
      {"random_forest", ModelFamily::RandomForest},
      {"rf", ModelFamily::RandomForest},
  };
  if (const auto it = known.find(key); it != known.end()) return it->second;
  static constexpr std::array<std::string_view, 6> unsupported = {
      "svr", "mars", "lasso", "stepwise", "boosted_tree", "bagged_nn"};
  for (const auto u : unsupported) {
    if (key == u) {
      throw ConfigError("model family '" + key +
                        "' is not supported by this build (supported: ols, ridge, quantile, knn, "
                        "tree, nn, bagged_tree, random_forest)");
    }
  }
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

bool is_linear_family(ModelFamily family) noexcept {
  return family == ModelFamily::OLS || family == ModelFamily::Ridge ||
         family == ModelFamily::QuantileReg;
}

std::string_view provenance_name(Provenance p) noexcept {
  return p == Provenance::Symmetric ? "symmetric" : "asymmetric";
}

void LossMode::validate() const {
  switch (kind) {
    case Kind::Symmetric:
      return;
    case Kind::Pinball:
      if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("pinball loss: tau must be in (0, 1)");
      if (!(smoothing >= 0.0 && std::isfinite(smoothing))) {
        throw ConfigError("pinball loss: smoothing must be non-negative");
      }
      return;
    case Kind::QQCApprox:
      if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
        throw ConfigError("qqc_approx loss: a and b must be positive");
      }
      if (!(steepness > 0.0 && std::isfinite(steepness))) {
        throw ConfigError("qqc_approx loss: steepness must be positive");
      }
      return;
  }
}

void NNConfig::validate() const {
  if (hidden_nodes == 0) throw ConfigError("nn: hidden_nodes must be at least 1");
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0)) throw ConfigError("nn: lambda1 and lambda2 must be >= 0");
  if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) {
    throw ConfigError("nn: learning_rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("nn: batch_size must be at least 1");
}

ModelFamily ModelSpec::family() const noexcept {
  return static_cast<ModelFamily>(params.index());
}

Provenance ModelSpec::provenance() const noexcept {
  if (std::holds_alternative<QuantileParams>(params)) return Provenance::Asymmetric;
  if (const auto* nn = std::get_if<NeuralNetParams>(&params)) {
    return nn->loss.kind == LossMode::Kind::Symmetric ? Provenance::Symmetric
                                                      : Provenance::Asymmetric;
  }
  return Provenance::Symmetric;
}

namespace {

using text::format_double;

std::string tree_fields(const TreeParams& t) {
  return " cp=" + format_double(t.complexity) + " min_node=" + std::to_string(t.min_node) +
         " max_depth=" + std::to_string(t.max_depth);
}

std::string_view loss_kind_name(LossMode::Kind k) {
  switch (k) {
    case LossMode::Kind::Symmetric: return "symmetric";
    case LossMode::Kind::Pinball: return "pinball";
    case LossMode::Kind::QQCApprox: return "qqc_approx";
  }
  return "?";
}

class Fields {
 public:
  Fields(std::istringstream& in, std::string_view family) : family_(family) {
    std::string token;
    while (in >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("model spec '" + family_ + "': expected key=value, got '" + token + "'");
      }
      values_[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }

  double real(const std::string& key, double fallback) {
    const auto raw = take(key);
    if (!raw) return fallback;
    const auto v = text::parse_double(*raw);
    if (!v) throw ConfigError(where(key) + "not a number: '" + *raw + "'");
    return *v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const auto raw = take(key);
    if (!raw) return fallback;
    const auto v = text::parse_uint(*raw);
    if (!v) throw ConfigError(where(key) + "not a non-negative integer: '" + *raw + "'");
    return static_cast<std::uint64_t>(*v);
  }

  std::string word(const std::string& key, const std::string& fallback) {
    const auto raw = take(key);
    return raw ? text::lower(*raw) : fallback;
  }

  TreeParams tree() {
    TreeParams t;
    t.complexity = real("cp", t.complexity);
    t.min_node = integer("min_node", t.min_node);
    t.max_depth = integer("max_depth", t.max_depth);
    if (t.complexity < 0.0 || t.min_node == 0) {
      throw ConfigError(where("cp") + "cp must be >= 0 and min_node >= 1");
    }
    return t;
  }

  void finish() const {
    if (!values_.empty()) {
      throw ConfigError("model spec '" + family_ + "': unknown key '" + values_.begin()->first + "'");
    }
  }

 private:
  std::optional<std::string> take(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    auto v = it->second;
    values_.erase(it);
    return v;
  }

  std::string where(const std::string& key) const {
    return "model spec '" + family_ + "', key '" + key + "': ";
  }

  std::string family_;
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string ModelSpec::to_string() const {
  std::string out(model_family_name(family()));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RidgeParams>) {
          out += " lambda=" + format_double(p.lambda);
        } else if constexpr (std::is_same_v<T, QuantileParams>) {
          out += " tau=" + format_double(p.tau);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          out += " k=" + std::to_string(p.k) + " algorithm=" +
                 (p.algorithm == KnnAlgorithm::KdTree ? "kdtree" : "brute");
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          out += tree_fields(p);
        } else if constexpr (std::is_same_v<T, NeuralNetParams>) {
          const auto& c = p.config;
          out += " k=" + std::to_string(c.hidden_nodes) + " lambda1=" + format_double(c.lambda1) +
                 " lambda2=" + format_double(c.lambda2) + " activation=" +
                 (c.activation == Activation::Tanh ? "tanh" : "logistic") +
                 " epochs=" + std::to_string(c.epochs) + " lr=" + format_double(c.learning_rate) +
                 " batch=" + std::to_string(c.batch_size) + " seed=" + std::to_string(c.seed);
          out += " loss=";
          out += loss_kind_name(p.loss.kind);
          if (p.loss.kind == LossMode::Kind::Pinball) {
            out += " tau=" + format_double(p.loss.tau);
            if (p.loss.smoothing > 0.0) out += " smoothing=" + format_double(p.loss.smoothing);
          } else if (p.loss.kind == LossMode::Kind::QQCApprox) {
            out += " a=" + format_double(p.loss.a) + " b=" + format_double(p.loss.b) +
                   " steepness=" + format_double(p.loss.steepness);
          }
        } else if constexpr (std::is_same_v<T, BaggedTreeParams>) {
          out += " bags=" + std::to_string(p.bags) + " seed=" + std::to_string(p.seed) +
                 tree_fields(p.tree);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          out += " trees=" + std::to_string(p.trees) + " mtry=" + std::to_string(p.mtry) +
                 " seed=" + std::to_string(p.seed) + tree_fields(p.tree);
        }
      },
      params);
  return out;
}

ModelSpec parse_model_spec(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string name;
  if (!(in >> name)) throw ConfigError("empty model spec");
  const auto family = parse_model_family(name);
  Fields f(in, name);
  ModelSpec spec;
  switch (family) {
    case ModelFamily::OLS:
      spec.params = OlsParams{};
      break;
    case ModelFamily::Ridge: {
      RidgeParams p;
      p.lambda = f.real("lambda", p.lambda);
      if (p.lambda < 0.0) throw ConfigError("ridge: lambda must be >= 0");
      spec.params = p;
      break;
    }
    case ModelFamily::QuantileReg: {
      QuantileParams p;
      p.tau = f.real("tau", p.tau);
      if (!(p.tau > 0.0 && p.tau < 1.0)) throw ConfigError("quantile: tau must be in (0, 1)");
      spec.params = p;
      break;
    }
    case ModelFamily::KNN: {
      KnnParams p;
      p.k = f.integer("k", p.k);
      const auto alg = f.word("algorithm", "kdtree");
      if (alg == "kdtree" || alg == "kd_tree") p.algorithm = KnnAlgorithm::KdTree;
      else if (alg == "brute" || alg == "brute_force") p.algorithm = KnnAlgorithm::BruteForce;
      else throw ConfigError("knn: unknown algorithm '" + alg + "' (use kdtree or brute)");
      if (p.k == 0) throw ConfigError("knn: k must be at least 1");
      spec.params = p;
      break;
    }
    case ModelFamily::Tree:
      spec.params = f.tree();
      break;
    case ModelFamily::NeuralNet: {
      NeuralNetParams p;
      auto& c = p.config;
      c.hidden_nodes = f.integer("k", c.hidden_nodes);
      c.lambda1 = f.real("lambda1", c.lambda1);
      c.lambda2 = f.real("lambda2", c.lambda2);
      const auto act = f.word("activation", "logistic");
      if (act == "logistic") c.activation = Activation::Logistic;
      else if (act == "tanh") c.activation = Activation::Tanh;
      else throw ConfigError("nn: unknown activation '" + act + "'");
      c.epochs = f.integer("epochs", c.epochs);
      c.learning_rate = f.real("lr", c.learning_rate);
      c.batch_size = f.integer("batch", c.batch_size);
      c.seed = f.integer("seed", c.seed);
      const auto loss = f.word("loss", "symmetric");
      if (loss == "symmetric" || loss == "squared_error") {
        p.loss = LossMode::symmetric();
      } else if (loss == "pinball") {
        p.loss = LossMode::pinball(f.real("tau", 0.5), f.real("smoothing", 0.0));
      } else if (loss == "qqc_approx") {
        const double a = f.real("a", 1.0);
        const double b = f.real("b", 1.0);
        p.loss = LossMode::qqc_approx(a, b, f.real("steepness", 99.0));
      } else {
        throw ConfigError("nn: unknown loss '" + loss + "'");
      }
      c.validate();
      p.loss.validate();
      spec.params = p;
      break;
    }
    case ModelFamily::BaggedTree: {
      BaggedTreeParams p;
      p.bags = f.integer("bags", p.bags);
      p.seed = f.integer("seed", p.seed);
      p.tree = f.tree();
      if (p.bags == 0) throw ConfigError("bagged_tree: bags must be at least 1");
      spec.params = p;
      break;
    }
    case ModelFamily::RandomForest: {
      ForestParams p;
      p.trees = f.integer("trees", p.trees);
      p.mtry = f.integer("mtry", p.mtry);
      p.seed = f.integer("seed", p.seed);
      p.tree = f.tree();
      if (p.trees == 0 || p.mtry == 0) {
        throw ConfigError("random_forest: trees and mtry must be at least 1");
      }
      spec.params = p;
      break;
    }
  }
  f.finish();
  return spec;
}

Model::Model(ModelSpec spec, std::shared_ptr<const Regressor> state, std::size_t input_dim)
    : spec_(std::move(spec)), state_(std::move(state)), input_dim_(input_dim) {
  if (!state_) throw InvalidInputError("model has no fitted state");
}

Vector Model::predict(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_dim_) {
    throw InvalidInputError("predict: model " + spec_.to_string() + " expects " +
                            std::to_string(input_dim_) + " feature columns, got " +
                            std::to_string(features.cols()));
  }
  return state_->predict(features);
}

Model fit_model(const ModelSpec& spec, const Matrix& features, const Vector& target) {
  return std::visit(
      [&](const auto& p) -> Model {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OlsParams>) {
          return fit_ols(features, target);
        } else if constexpr (std::is_same_v<T, RidgeParams>) {
          return fit_ridge(features, target, p.lambda);
        } else if constexpr (std::is_same_v<T, QuantileParams>) {
          return fit_quantile(features, target, p.tau);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          return fit_knn(features, target, p.k, p.algorithm);
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          return fit_tree(features, target, p);
        } else if constexpr (std::is_same_v<T, NeuralNetParams>) {
          return fit_nn(features, target, p.config, p.loss);
        } else if constexpr (std::is_same_v<T, BaggedTreeParams>) {
          return fit_bagged_tree(features, target, p.bags, p.seed, p.tree);
        } else {
          return fit_random_forest(features, target, p.trees, p.mtry, p.seed, p.tree);
        }
      },
      spec.params);
}

void save_model(const Model& model, std::ostream& out) {
  out << "model " << model.input_dim() << ' ' << model.spec().to_string() << '\n';
  model.state().save(out);
}

Model load_model(std::istream& in) {
  serial::expect(in, "model");
  const auto dim = serial::read_size(in);
  std::string line;
  std::getline(in, line);
  auto spec = parse_model_spec(line);
  std::shared_ptr<const Regressor> state;
  switch (spec.family()) {
    case ModelFamily::OLS:
    case ModelFamily::Ridge:
    case ModelFamily::QuantileReg:
      state = LinearRegressor::load(in);
      break;
    case ModelFamily::KNN:
      state = KnnRegressor::load(in);
      break;
    case ModelFamily::Tree:
    case ModelFamily::BaggedTree:
    case ModelFamily::RandomForest:
      state = TreeEnsembleRegressor::load(in);
      break;
    case ModelFamily::NeuralNet:
      state = NeuralNetRegressor::load(in);
      break;
  }
  return Model(std::move(spec), std::move(state), dim);
}

}  // namespace asymcast
