#pragma once

#include "asymcast/models/model.hpp"

namespace asymcast {

/// Single-hidden-layer feedforward net with identity output:
///   f(x) = y_offset + y_scale * (v0 + sum_e v_e * g(w_e . x + c_e))
/// The network is trained on the standardized target (y - y_offset) / y_scale.
struct NNWeights {
  Matrix w;            // k x m input-to-hidden
  Vector hidden_bias;  // k
  Vector v;            // k hidden-to-output
  double v0 = 0.0;     // output bias
  Activation activation = Activation::Logistic;
  double y_offset = 0.0;
  double y_scale = 1.0;

  std::size_t hidden_nodes() const noexcept { return static_cast<std::size_t>(v.size()); }
  std::size_t inputs() const noexcept { return static_cast<std::size_t>(w.cols()); }

  /// Output in standardized-target units.
  Vector forward(const Matrix& features) const;
  /// Output in target units.
  Vector predict(const Matrix& features) const;

  /// Sum of squared w, v and v0: the quantity the penalties shrink.
  double weight_norm() const;

  /// Flat parameter vector: w (column-major), hidden_bias, v, v0.
  Vector pack() const;
  void unpack(const Vector& params);
  std::size_t parameter_count() const noexcept;
};

/// mean(loss(r_i)) + lambda1 * sum w^2 + lambda2 * (sum v^2 + v0^2), with
/// r_i the residual in standardized units. QQCApprox steepness is applied to
/// residuals in target units.
double nn_objective(const NNWeights& weights, const Matrix& features, const Vector& target,
                    const NNConfig& config, const LossMode& loss);

/// Gradient of nn_objective in pack() order.
Vector nn_gradient(const NNWeights& weights, const Matrix& features, const Vector& target,
                   const NNConfig& config, const LossMode& loss);

class NeuralNetRegressor final : public Regressor {
 public:
  explicit NeuralNetRegressor(NNWeights weights) : weights_(std::move(weights)) {}

  Vector predict(const Matrix& features) const override { return weights_.predict(features); }
  void save(std::ostream& out) const override;
  static std::shared_ptr<const NeuralNetRegressor> load(std::istream& in);

  const NNWeights& weights() const noexcept { return weights_; }

 private:
  NNWeights weights_;
};

/// Mini-batch Adam on nn_objective. Deterministic given config.seed.
/// Throws TrainingError when the objective stops being finite.
Model fit_nn(const Matrix& features, const Vector& target, const NNConfig& config,
             const LossMode& loss);

/// Wraps fixed weights as a model (spec records `config` and `loss`).
Model make_nn_model(NNWeights weights, const NNConfig& config = {}, const LossMode& loss = {});

}  // namespace asymcast
