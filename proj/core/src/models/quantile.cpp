#include "asymcast/models/quantile.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace asymcast {

double quantile_objective(const Matrix& design, const Vector& target, const Vector& beta,
                          double tau) {
  const Vector r = target - design * beta;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum += r[i] > 0.0 ? tau * r[i] : (tau - 1.0) * r[i];
  return sum;
}

namespace {

// Largest step in [0, 1] keeping v + step * dv >= 0.
double max_step(const Vector& v, const Vector& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

struct Direction {
  Vector dx, dy, dz, dw;
};

// Newton direction for the bounded LP, with s = u - x eliminated.
Direction solve_newton(const Matrix& design, const Vector& x, const Vector& s, const Vector& z,
                       const Vector& w, const Vector& r_dual, const Vector& r_primal,
                       const Vector& r_xz, const Vector& r_sw, const Eigen::LDLT<Matrix>& normal,
                       const Vector& theta) {
  const Vector rho = r_dual.array() - r_xz.array() / x.array() + r_sw.array() / s.array();
  const Vector rhs = r_primal + design.transpose() * (theta.array() * rho.array()).matrix();
  Direction d;
  d.dy = normal.solve(rhs);
  d.dx = theta.array() * ((design * d.dy) - rho).array();
  d.dz = (r_xz.array() - z.array() * d.dx.array()) / x.array();
  d.dw = (r_sw.array() + w.array() * d.dx.array()) / s.array();
  return d;
}

// Picks p linearly independent observations with the smallest |residual| and
// returns the exact fit through them, if any.
std::optional<Vector> basic_solution(const Matrix& design, const Vector& target,
                                     const Vector& residuals) {
  const auto n = design.rows();
  const auto p = design.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(residuals[a]) < std::abs(residuals[b]);
  });
  Matrix basis(p, p);  // orthonormalized rows accepted so far
  Matrix rows(p, p);
  Vector rhs(p);
  Eigen::Index taken = 0;
  for (const auto i : order) {
    if (taken == p) break;
    Eigen::RowVectorXd v = design.row(i);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (Eigen::Index k = 0; k < taken; ++k) v -= v.dot(basis.row(k)) * basis.row(k);
    const double norm = v.norm();
    if (norm <= 1e-9 * norm0) continue;
    basis.row(taken) = v / norm;
    rows.row(taken) = design.row(i);
    rhs[taken] = target[i];
    ++taken;
  }
  if (taken < p) return std::nullopt;
  Eigen::FullPivLU<Matrix> lu(rows);
  if (!lu.isInvertible()) return std::nullopt;
  return Vector(lu.solve(rhs));
}

}  // namespace

LinearCoefficients solve_quantile(const Matrix& design, const Vector& target, double tau,
                                  const QuantileOptions& options) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("quantile regression: tau must lie in (0, 1), got " +
                      text::format_double(tau));
  }
  const auto n = design.rows();
  const auto p = design.cols();
  if (target.size() != n) throw InvalidInputError("quantile regression: shape mismatch");
  if (p == 0) throw InvalidInputError("quantile regression: empty design");

  // Dual LP in standard form: min c'x, A x = b, 0 <= x <= 1 with A = X'.
  const Vector c = -target;
  const Vector b = (1.0 - tau) * design.transpose() * Vector::Ones(n);

  Vector x = Vector::Constant(n, 1.0 - tau);
  Vector s = Vector::Constant(n, tau);

  Eigen::ColPivHouseholderQR<Matrix> ls(design);
  if (ls.rank() < p) {
    throw SingularDesignError("quantile regression: design matrix is rank deficient", {});
  }
  Vector y = ls.solve(c);
  const Vector r0 = c - design * y;
  const double shift = std::max(1e-8, 1e-2 * r0.cwiseAbs().mean());
  Vector z = r0.cwiseMax(0.0).array() + shift;
  Vector w = (-r0).cwiseMax(0.0).array() + shift;

  const double scale = 1.0 + target.cwiseAbs().sum();
  double best_objective = std::numeric_limits<double>::infinity();
  Vector best_beta = -y;
  bool converged = false;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const double primal_obj = c.dot(x);
    const double dual_obj = b.dot(y) - w.sum();
    const Vector r_primal = b - design.transpose() * x;
    const Vector r_dual = c - design * y - z + w;

    const Vector beta = -y;
    const double objective = quantile_objective(design, target, beta, tau);
    if (objective < best_objective) {
      best_objective = objective;
      best_beta = beta;
    }
    const double gap = std::abs(primal_obj - dual_obj);
    if (gap <= options.tolerance * scale && r_primal.norm() <= 1e-9 * scale &&
        r_dual.norm() <= 1e-9 * scale) {
      converged = true;
      break;
    }

    const Vector theta = 1.0 / (z.array() / x.array() + w.array() / s.array());
    const Matrix weighted = design.array().colwise() * theta.array().sqrt();
    Eigen::LDLT<Matrix> normal(weighted.transpose() * weighted);
    if (normal.info() != Eigen::Success) break;

    // Predictor.
    const Vector r_xz_aff = -(x.array() * z.array());
    const Vector r_sw_aff = -(s.array() * w.array());
    const Direction aff =
        solve_newton(design, x, s, z, w, r_dual, r_primal, r_xz_aff, r_sw_aff, normal, theta);
    const Vector ds_aff = -aff.dx;
    const double ap = std::min(max_step(x, aff.dx), max_step(s, ds_aff));
    const double ad = std::min(max_step(z, aff.dz), max_step(w, aff.dw));
    const double mu = (x.dot(z) + s.dot(w)) / (2.0 * static_cast<double>(n));
    const double mu_aff =
        ((x + ap * aff.dx).dot(z + ad * aff.dz) + (s + ap * ds_aff).dot(w + ad * aff.dw)) /
        (2.0 * static_cast<double>(n));
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector.
    const Vector r_xz = (sigma * mu - (x.array() * z.array()) - aff.dx.array() * aff.dz.array());
    const Vector r_sw = (sigma * mu - (s.array() * w.array()) - ds_aff.array() * aff.dw.array());
    const Direction d = solve_newton(design, x, s, z, w, r_dual, r_primal, r_xz, r_sw, normal, theta);
    const Vector ds = -d.dx;
    constexpr double kBoundary = 0.99995;
    const double step_p = std::min(1.0, kBoundary * std::min(max_step(x, d.dx), max_step(s, ds)));
    const double step_d = std::min(1.0, kBoundary * std::min(max_step(z, d.dz), max_step(w, d.dw)));
    x += step_p * d.dx;
    s += step_p * ds;
    y += step_d * d.dy;
    z += step_d * d.dz;
    w += step_d * d.dw;
    if (!x.allFinite() || !y.allFinite()) break;
  }

  if (!converged) {
    // The last iterate may still be optimal to the requested accuracy.
    const double final_obj = quantile_objective(design, target, -y, tau);
    if (final_obj < best_objective) {
      best_objective = final_obj;
      best_beta = -y;
    }
    throw ConvergenceError("quantile regression did not converge within " +
                               std::to_string(options.max_iterations) + " iterations",
                           best_objective);
  }

  if (options.vertex) {
    const Vector residuals = target - design * best_beta;
    if (auto vertex = basic_solution(design, target, residuals)) {
      const double obj_vertex = quantile_objective(design, target, *vertex, tau);
      if (obj_vertex <= best_objective + 1e-10 * (1.0 + best_objective)) {
        best_beta = *vertex;
      }
    }
  }
  return LinearCoefficients{best_beta};
}

Model fit_quantile(const Matrix& features, const Vector& target, double tau,
                   const QuantileOptions& options) {
  if (features.rows() != target.size()) {
    throw InvalidInputError("fit_quantile: feature rows and target length differ");
  }
  if (features.rows() <= features.cols() + 1) {
    throw InvalidInputError("fit_quantile: need more rows than columns + 1");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw InvalidInputError("fit_quantile: non-finite input");
  }
  auto coef = solve_quantile(with_intercept(features), target, tau, options);
  return Model(ModelSpec{QuantileParams{tau}}, std::make_shared<LinearRegressor>(std::move(coef)),
               static_cast<std::size_t>(features.cols()));
}

}  // namespace asymcast
