#include "asymcast/models/neural_net.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/random.hpp"
#include "serial.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace asymcast {

namespace {

Matrix activate(const Matrix& pre, Activation act) {
  if (act == Activation::Tanh) return pre.array().tanh().matrix();
  return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
}

// Derivative expressed through the activation value.
Matrix activation_slope(const Matrix& value, Activation act) {
  if (act == Activation::Tanh) return (1.0 - value.array().square()).matrix();
  return (value.array() * (1.0 - value.array())).matrix();
}

struct LossKernel {
  LossMode mode;
  CostSpec spec;

  LossKernel(const LossMode& m, double y_scale) : mode(m) {
    switch (m.kind) {
      case LossMode::Kind::Symmetric:
        spec = CostSpec::squared_error();
        break;
      case LossMode::Kind::Pinball:
        spec = CostSpec::pinball(m.tau);
        break;
      case LossMode::Kind::QQCApprox:
        spec = CostSpec::qqc_approx(m.a, m.b, m.steepness * y_scale);
        break;
    }
  }

  double value(double r) const {
    if (mode.kind == LossMode::Kind::Pinball && mode.smoothing > 0.0) {
      const double eps = mode.smoothing;
      const double h = std::abs(r) <= eps ? r * r / (2.0 * eps) : std::abs(r) - 0.5 * eps;
      return (r > 0.0 ? mode.tau : 1.0 - mode.tau) * h;
    }
    return detail::loss_unchecked(spec, r);
  }

  double slope(double r) const {
    if (mode.kind == LossMode::Kind::Pinball && mode.smoothing > 0.0) {
      const double eps = mode.smoothing;
      const double dh = std::abs(r) <= eps ? r / eps : (r > 0.0 ? 1.0 : -1.0);
      return (r > 0.0 ? mode.tau : 1.0 - mode.tau) * dh;
    }
    return detail::grad_unchecked(spec, r);
  }
};

struct Gradient {
  Matrix w;
  Vector c;
  Vector v;
  double v0 = 0.0;
  double loss = 0.0;
};

// Mean loss and its gradient over the rows of `x` (standardized target `t`).
void batch_gradient(const NNWeights& nn, const Matrix& x, const Vector& t, const LossKernel& kernel,
                    Gradient& g) {
  const auto n = static_cast<double>(x.rows());
  Matrix pre = x * nn.w.transpose();
  pre.rowwise() += nn.hidden_bias.transpose();
  const Matrix act = activate(pre, nn.activation);
  const Vector z = (act * nn.v).array() + nn.v0;
  Vector dz(x.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = t[i] - z[i];
    loss += kernel.value(r);
    dz[i] = -kernel.slope(r) / n;
  }
  g.loss = loss / n;
  g.v = act.transpose() * dz;
  g.v0 = dz.sum();
  const Matrix delta = (dz * nn.v.transpose()).cwiseProduct(activation_slope(act, nn.activation));
  g.w = delta.transpose() * x;
  g.c = delta.colwise().sum().transpose();
}

void add_penalty(const NNWeights& nn, const NNConfig& cfg, Gradient& g) {
  g.w += 2.0 * cfg.lambda1 * nn.w;
  g.v += 2.0 * cfg.lambda2 * nn.v;
  g.v0 += 2.0 * cfg.lambda2 * nn.v0;
}

double penalty(const NNWeights& nn, const NNConfig& cfg) {
  return cfg.lambda1 * nn.w.squaredNorm() +
         cfg.lambda2 * (nn.v.squaredNorm() + nn.v0 * nn.v0);
}

Vector standardized(const NNWeights& nn, const Vector& target) {
  return ((target.array() - nn.y_offset) / nn.y_scale).matrix();
}

void check_shapes(const NNWeights& nn, const Matrix& features, const Vector& target) {
  if (features.rows() != target.size() || features.rows() == 0) {
    throw InvalidInputError("neural net: feature rows and target length differ or are empty");
  }
  if (static_cast<std::size_t>(features.cols()) != nn.inputs()) {
    throw InvalidInputError("neural net: expected " + std::to_string(nn.inputs()) +
                            " feature columns, got " + std::to_string(features.cols()));
  }
}

}  // namespace

Vector NNWeights::forward(const Matrix& features) const {
  Matrix pre = features * w.transpose();
  pre.rowwise() += hidden_bias.transpose();
  return (activate(pre, activation) * v).array() + v0;
}

Vector NNWeights::predict(const Matrix& features) const {
  return (forward(features).array() * y_scale + y_offset).matrix();
}

double NNWeights::weight_norm() const { return w.squaredNorm() + v.squaredNorm() + v0 * v0; }

std::size_t NNWeights::parameter_count() const noexcept {
  return static_cast<std::size_t>(w.size() + hidden_bias.size() + v.size() + 1);
}

Vector NNWeights::pack() const {
  Vector p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  p.segment(at, w.size()) = w.reshaped();
  at += w.size();
  p.segment(at, hidden_bias.size()) = hidden_bias;
  at += hidden_bias.size();
  p.segment(at, v.size()) = v;
  at += v.size();
  p[at] = v0;
  return p;
}

void NNWeights::unpack(const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) {
    throw InvalidInputError("neural net: parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  w.reshaped() = p.segment(at, w.size());
  at += w.size();
  hidden_bias = p.segment(at, hidden_bias.size());
  at += hidden_bias.size();
  v = p.segment(at, v.size());
  at += v.size();
  v0 = p[at];
}

double nn_objective(const NNWeights& weights, const Matrix& features, const Vector& target,
                    const NNConfig& config, const LossMode& loss) {
  check_shapes(weights, features, target);
  const LossKernel kernel(loss, weights.y_scale);
  const Vector t = standardized(weights, target);
  const Vector z = weights.forward(features);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += kernel.value(t[i] - z[i]);
  return sum / static_cast<double>(z.size()) + penalty(weights, config);
}

Vector nn_gradient(const NNWeights& weights, const Matrix& features, const Vector& target,
                   const NNConfig& config, const LossMode& loss) {
  check_shapes(weights, features, target);
  const LossKernel kernel(loss, weights.y_scale);
  Gradient g;
  batch_gradient(weights, features, standardized(weights, target), kernel, g);
  add_penalty(weights, config, g);
  NNWeights packed = weights;
  packed.w = g.w;
  packed.hidden_bias = g.c;
  packed.v = g.v;
  packed.v0 = g.v0;
  return packed.pack();
}

void NeuralNetRegressor::save(std::ostream& out) const {
  const auto& nn = weights_;
  out << "nn " << (nn.activation == Activation::Tanh ? "tanh" : "logistic") << ' '
      << text::format_double(nn.y_offset) << ' ' << text::format_double(nn.y_scale) << ' '
      << text::format_double(nn.v0) << '\n';
  serial::write_matrix(out, nn.w);
  serial::write_vector(out, nn.hidden_bias);
  serial::write_vector(out, nn.v);
}

std::shared_ptr<const NeuralNetRegressor> NeuralNetRegressor::load(std::istream& in) {
  serial::expect(in, "nn");
  NNWeights nn;
  const auto act = serial::next_token(in);
  if (act == "tanh") nn.activation = Activation::Tanh;
  else if (act == "logistic") nn.activation = Activation::Logistic;
  else throw IngestionError("model bundle: unknown activation '" + act + "'", 0);
  nn.y_offset = serial::read_double(in);
  nn.y_scale = serial::read_double(in);
  nn.v0 = serial::read_double(in);
  nn.w = serial::read_matrix(in);
  nn.hidden_bias = serial::read_vector(in);
  nn.v = serial::read_vector(in);
  if (nn.hidden_bias.size() != nn.w.rows() || nn.v.size() != nn.w.rows()) {
    throw IngestionError("model bundle: inconsistent network shapes", 0);
  }
  return std::make_shared<NeuralNetRegressor>(std::move(nn));
}

Model make_nn_model(NNWeights weights, const NNConfig& config, const LossMode& loss) {
  const auto m = weights.inputs();
  return Model(ModelSpec{NeuralNetParams{config, loss}},
               std::make_shared<NeuralNetRegressor>(std::move(weights)), m);
}

Model fit_nn(const Matrix& features, const Vector& target, const NNConfig& config,
             const LossMode& loss) {
  config.validate();
  loss.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  const auto m = static_cast<std::size_t>(features.cols());
  if (n == 0 || target.size() != features.rows()) {
    throw InvalidInputError("fit_nn: feature rows and target length differ or are empty");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw InvalidInputError("fit_nn: non-finite input");
  }
  const auto k = static_cast<Eigen::Index>(config.hidden_nodes);
  const auto mi = static_cast<Eigen::Index>(m);

  NNWeights nn;
  nn.activation = config.activation;
  nn.y_offset = target.mean();
  const double sd = std::sqrt((target.array() - nn.y_offset).square().sum() /
                              static_cast<double>(std::max<std::size_t>(1, n - 1)));
  nn.y_scale = sd > 0.0 ? sd : 1.0;

  Rng rng(config.seed);
  const double w_sd = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, m)));
  const double v_sd = 1.0 / std::sqrt(static_cast<double>(k));
  nn.w.resize(k, mi);
  for (Eigen::Index j = 0; j < mi; ++j) {
    for (Eigen::Index e = 0; e < k; ++e) nn.w(e, j) = rng.normal(0.0, w_sd);
  }
  nn.hidden_bias = Vector::Zero(k);
  nn.v.resize(k);
  for (Eigen::Index e = 0; e < k; ++e) nn.v[e] = rng.normal(0.0, v_sd);
  nn.v0 = 0.0;

  const LossKernel kernel(loss, nn.y_scale);
  const Vector t = standardized(nn, target);

  // Adam state in pack() order.
  const auto p = static_cast<Eigen::Index>(nn.parameter_count());
  Vector m1 = Vector::Zero(p), m2 = Vector::Zero(p);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double pow1 = 1.0, pow2 = 1.0;

  const std::size_t batch = std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix xb;
  Vector tb;
  Gradient g;
  NNWeights grad_view = nn;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Linear decay to a tenth of the initial rate over the budget.
    const double frac = config.epochs > 1
                            ? static_cast<double>(epoch) / static_cast<double>(config.epochs - 1)
                            : 0.0;
    const double lr = config.learning_rate * (1.0 - 0.9 * frac);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const auto rows = static_cast<Eigen::Index>(end - start);
      xb.resize(rows, mi);
      tb.resize(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto src = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(r)]);
        xb.row(r) = features.row(src);
        tb[r] = t[src];
      }
      batch_gradient(nn, xb, tb, kernel, g);
      add_penalty(nn, config, g);
      epoch_loss += g.loss * static_cast<double>(rows);

      grad_view.w = g.w;
      grad_view.hidden_bias = g.c;
      grad_view.v = g.v;
      grad_view.v0 = g.v0;
      const Vector grad = grad_view.pack();
      pow1 *= beta1;
      pow2 *= beta2;
      m1 = beta1 * m1 + (1.0 - beta1) * grad;
      m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseProduct(grad);
      const Vector step = (m1.array() / (1.0 - pow1)) /
                          ((m2.array() / (1.0 - pow2)).sqrt() + eps);
      nn.unpack(nn.pack() - lr * step);
    }
    if (!std::isfinite(epoch_loss) || !nn.pack().allFinite()) {
      throw TrainingError("fit_nn: training diverged at epoch " + std::to_string(epoch + 1) +
                          " (loss is not finite); try a smaller learning_rate");
    }
  }
  return Model(ModelSpec{NeuralNetParams{config, loss}},
               std::make_shared<NeuralNetRegressor>(std::move(nn)), m);
}

}  // namespace asymcast
