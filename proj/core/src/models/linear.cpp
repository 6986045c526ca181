#include "asymcast/models/linear.hpp"

#include "asymcast/errors.hpp"
#include "serial.hpp"

#include <Eigen/QR>

namespace asymcast {

LinearRegressor::LinearRegressor(LinearCoefficients coefficients) : coef_(std::move(coefficients)) {}

Vector LinearRegressor::predict(const Matrix& features) const {
  const auto m = coef_.beta.size() - 1;
  return (features * coef_.beta.tail(m)).array() + coef_.beta[0];
}

void LinearRegressor::save(std::ostream& out) const {
  out << "linear\n";
  serial::write_vector(out, coef_.beta);
}

std::shared_ptr<const LinearRegressor> LinearRegressor::load(std::istream& in) {
  serial::expect(in, "linear");
  return std::make_shared<LinearRegressor>(LinearCoefficients{serial::read_vector(in)});
}

Matrix with_intercept(const Matrix& features) {
  Matrix design(features.rows(), features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(features.cols()) = features;
  return design;
}

namespace {

void check_shapes(const Matrix& features, const Vector& target, const char* who) {
  if (features.rows() != target.size()) {
    throw InvalidInputError(std::string(who) + ": feature rows and target length differ");
  }
  if (features.rows() <= features.cols() + 1) {
    throw InvalidInputError(std::string(who) + ": need more rows than columns + 1 (n=" +
                            std::to_string(features.rows()) +
                            ", m=" + std::to_string(features.cols()) + ")");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw InvalidInputError(std::string(who) + ": non-finite input");
  }
}

}  // namespace

Model fit_ols(const Matrix& features, const Vector& target, std::span<const std::string> names) {
  check_shapes(features, target, "fit_ols");
  const Matrix design = with_intercept(features);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < design.cols(); ++i) {
      const auto col = perm[i];
      if (col == 0) {
        offending.emplace_back("intercept");
      } else if (static_cast<std::size_t>(col - 1) < names.size()) {
        offending.push_back(names[static_cast<std::size_t>(col - 1)]);
      } else {
        offending.push_back("x" + std::to_string(col));
      }
    }
    std::string list;
    for (const auto& o : offending) list += (list.empty() ? "" : ", ") + o;
    throw SingularDesignError("fit_ols: design matrix is rank deficient; dependent columns: " + list,
                              std::move(offending));
  }
  LinearCoefficients coef{qr.solve(target)};
  return Model(ModelSpec{OlsParams{}}, std::make_shared<LinearRegressor>(std::move(coef)),
               static_cast<std::size_t>(features.cols()));
}

Model fit_ridge(const Matrix& features, const Vector& target, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("fit_ridge: lambda must be non-negative");
  check_shapes(features, target, "fit_ridge");
  const Eigen::RowVectorXd means = features.colwise().mean();
  const double y_mean = target.mean();
  const Matrix centered = features.rowwise() - means;
  Matrix gram = centered.transpose() * centered;
  gram.diagonal().array() += lambda;
  const Vector rhs = centered.transpose() * (target.array() - y_mean).matrix();
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw SingularDesignError("fit_ridge: penalized normal equations are singular", {});
  }
  const Vector slopes = ldlt.solve(rhs);
  if (!slopes.allFinite()) {
    throw SingularDesignError("fit_ridge: penalized normal equations are singular", {});
  }
  LinearCoefficients coef;
  coef.beta.resize(features.cols() + 1);
  coef.beta[0] = y_mean - means.dot(slopes);
  coef.beta.tail(features.cols()) = slopes;
  return Model(ModelSpec{RidgeParams{lambda}}, std::make_shared<LinearRegressor>(std::move(coef)),
               static_cast<std::size_t>(features.cols()));
}

const LinearCoefficients& coefficients(const Model& model) {
  const auto* linear = model.state_as<LinearRegressor>();
  if (linear == nullptr) {
    throw InvalidInputError("model of family " + std::string(model_family_name(model.family())) +
                            " has no linear coefficients");
  }
  return linear->coefficients();
}

}  // namespace asymcast
