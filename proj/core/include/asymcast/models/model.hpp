#pragma once

#include "asymcast/loss.hpp"
#include "asymcast/types.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace asymcast {

enum class ModelFamily { OLS, Ridge, QuantileReg, KNN, Tree, NeuralNet, BaggedTree, RandomForest };

std::string_view model_family_name(ModelFamily family) noexcept;
/// Throws ConfigError. Families that exist in the wider literature but are not
/// built here (svr, mars, lasso, stepwise, boosted_tree, bagged_nn) get a
/// message saying so.
ModelFamily parse_model_family(std::string_view name);
bool is_linear_family(ModelFamily family) noexcept;

enum class Provenance { Symmetric, Asymmetric };
std::string_view provenance_name(Provenance p) noexcept;

/// Training loss of a neural net.
struct LossMode {
  enum class Kind { Symmetric, Pinball, QQCApprox };

  Kind kind = Kind::Symmetric;
  double tau = 0.5;
  double a = 1.0;
  double b = 1.0;
  double steepness = 99.0;
  /// Pinball only: half-width of a quadratic band around zero (0 = exact pinball).
  double smoothing = 0.0;

  static LossMode symmetric() { return {}; }
  static LossMode pinball(double tau, double smoothing = 0.0) {
    return {Kind::Pinball, tau, 1.0, 1.0, 99.0, smoothing};
  }
  static LossMode qqc_approx(double a, double b, double steepness = 99.0) {
    return {Kind::QQCApprox, 0.5, a, b, steepness, 0.0};
  }

  void validate() const;
  bool operator==(const LossMode&) const = default;
};

enum class Activation { Logistic, Tanh };

struct NNConfig {
  std::size_t hidden_nodes = 4;
  double lambda1 = 1e-4;  // input-to-hidden weights
  double lambda2 = 1e-4;  // hidden-to-output weights
  Activation activation = Activation::Logistic;
  std::size_t epochs = 120;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const NNConfig&) const = default;
};

enum class KnnAlgorithm { BruteForce, KdTree };

struct TreeParams {
  /// Minimum SSE reduction of a split, as a fraction of the root node SSE.
  double complexity = 0.0;
  /// Minimum number of observations in each child of a split.
  std::size_t min_node = 5;
  std::size_t max_depth = 32;

  bool operator==(const TreeParams&) const = default;
};

struct OlsParams {
  bool operator==(const OlsParams&) const = default;
};
struct RidgeParams {
  double lambda = 1.0;
  bool operator==(const RidgeParams&) const = default;
};
struct QuantileParams {
  double tau = 0.5;
  bool operator==(const QuantileParams&) const = default;
};
struct KnnParams {
  std::size_t k = 10;
  KnnAlgorithm algorithm = KnnAlgorithm::KdTree;
  bool operator==(const KnnParams&) const = default;
};
struct NeuralNetParams {
  NNConfig config;
  LossMode loss;
  bool operator==(const NeuralNetParams&) const = default;
};
struct BaggedTreeParams {
  std::size_t bags = 10;
  TreeParams tree;
  std::uint64_t seed = 1;
  bool operator==(const BaggedTreeParams&) const = default;
};
struct ForestParams {
  std::size_t trees = 100;
  std::size_t mtry = 5;
  TreeParams tree;
  std::uint64_t seed = 1;
  bool operator==(const ForestParams&) const = default;
};

/// Family plus hyperparameters: everything needed to (re)fit a model.
struct ModelSpec {
  using Params = std::variant<OlsParams, RidgeParams, QuantileParams, KnnParams, TreeParams,
                              NeuralNetParams, BaggedTreeParams, ForestParams>;
  Params params;

  ModelFamily family() const noexcept;
  /// Asymmetric for quantile regression and for nets trained on a non-squared loss.
  Provenance provenance() const noexcept;
  /// One-line "family key=value ..." form; parse_model_spec reads it back.
  std::string to_string() const;

  bool operator==(const ModelSpec&) const = default;
};

ModelSpec parse_model_spec(std::string_view line);

/// Fitted learner. Implementations are immutable once built.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Vector predict(const Matrix& features) const = 0;
  virtual void save(std::ostream& out) const = 0;
};

/// Anything that maps a feature matrix to forecasts.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual Vector predict(const Matrix& features) const = 0;
};

/// A fitted model: its spec and learned state. Copies share the state.
class Model : public Forecaster {
 public:
  Model(ModelSpec spec, std::shared_ptr<const Regressor> state, std::size_t input_dim);

  /// Throws InvalidInputError when `features` has the wrong column count.
  Vector predict(const Matrix& features) const override;

  const ModelSpec& spec() const noexcept { return spec_; }
  ModelFamily family() const noexcept { return spec_.family(); }
  Provenance provenance() const noexcept { return spec_.provenance(); }
  std::size_t input_dim() const noexcept { return input_dim_; }
  const Regressor& state() const noexcept { return *state_; }

  template <class T>
  const T* state_as() const noexcept {
    return dynamic_cast<const T*>(state_.get());
  }

 private:
  ModelSpec spec_;
  std::shared_ptr<const Regressor> state_;
  std::size_t input_dim_;
};

/// Fits `spec` on (features, target). Seeded families use the seed stored in
/// their params.
Model fit_model(const ModelSpec& spec, const Matrix& features, const Vector& target);

/// Text serialization of a fitted model (spec line, then learned state).
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);

}  // namespace asymcast
