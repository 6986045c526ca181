// Independent reference implementations used by the unit and acceptance tests.
// Nothing here calls into the library's solvers; each oracle is the dumbest
// correct thing (enumeration, dense grids, finite differences).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double pinball(double tau, double e) { return e > 0 ? tau * e : (tau - 1.0) * e; }

// Textbook definitions, written out independently of the library.
inline double qqc(double a, double b, double e) { return e > 0 ? a * e * e : b * e * e; }
inline double llc(double a, double b, double e) { return e > 0 ? a * e : -b * e; }
inline double lec(double a, double b, double e) { return b * (std::exp(a * e) - a * e - 1.0); }

inline double mean_qqc(double a, double b, const VectorXd& y, const VectorXd& f) {
  double s = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += qqc(a, b, y[i] - f[i]);
  return s / static_cast<double>(y.size());
}

inline double mean_sq(const VectorXd& y, const VectorXd& f) { return (y - f).squaredNorm() / y.size(); }

inline double qr_objective(const MatrixXd& design, const VectorXd& y, const VectorXd& beta, double tau) {
  const VectorXd r = y - design * beta;
  double s = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += pinball(tau, r[i]);
  return s;
}

// Set of minimizers of sum_i rho_tau(y_i - q): a closed interval between two
// order statistics (degenerate when unique).
inline std::pair<double, double> quantile_minimizer_set(std::vector<double> y, double tau) {
  std::sort(y.begin(), y.end());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> at;
  for (double q : y) {
    double s = 0;
    for (double v : y) s += pinball(tau, v - q);
    if (s < best - 1e-12 * (1 + std::abs(best))) {
      best = s;
      at = {q};
    } else if (std::abs(s - best) <= 1e-12 * (1 + std::abs(best))) {
      at.push_back(q);
    }
  }
  return {*std::min_element(at.begin(), at.end()), *std::max_element(at.begin(), at.end())};
}

// Linear programming vertex enumeration: an optimum of the pinball objective
// interpolates p observations. Exact for small n and p = 2.
inline double qr_vertex_min(const MatrixXd& design, const VectorXd& y, double tau) {
  double best = std::numeric_limits<double>::infinity();
  const Eigen::Index n = design.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Matrix2d A;
      A << design(i, 0), design(i, 1), design(j, 0), design(j, 1);
      if (std::abs(A.determinant()) < 1e-12) continue;
      const Eigen::Vector2d beta = A.partialPivLu().solve(Eigen::Vector2d(y[i], y[j]));
      best = std::min(best, qr_objective(design, y, beta, tau));
    }
  return best;
}

// Dense grid followed by shrinking local perturbation on a 2-parameter
// objective. Slow but has no structure in common with a simplex solver.
inline double perturbation_min_2d(const std::function<double(double, double)>& f, double c0,
                                  double c1, double radius) {
  double b0 = c0, b1 = c1, best = f(c0, c1);
  const int g = 200;
  for (int i = -g; i <= g; ++i)
    for (int j = -g; j <= g; ++j) {
      const double x = c0 + radius * i / g, z = c1 + radius * j / g;
      const double v = f(x, z);
      if (v < best) best = v, b0 = x, b1 = z;
    }
  double step = radius / g;
  while (step > 1e-11) {
    bool moved = false;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dz = -1; dz <= 1; ++dz) {
        if (!dx && !dz) continue;
        const double v = f(b0 + dx * step, b1 + dz * step);
        if (v < best) best = v, b0 += dx * step, b1 += dz * step, moved = true;
      }
    if (!moved) step *= 0.5;
  }
  return best;
}

inline VectorXd normal_equations(const MatrixXd& design, const VectorXd& y) {
  const MatrixXd xtx = design.transpose() * design;
  return xtx.inverse() * (design.transpose() * y);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

inline VectorXd gradient_fd(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

// Markdown by brute force on a fixed grid over [-0.5, 0.5].
struct GridMarkdown {
  double md;
  double loss;
};
inline GridMarkdown markdown_grid(const VectorXd& f, const VectorXd& y, double a, double b,
                                  double step) {
  const long steps = std::lround(1.0 / step);
  GridMarkdown best{0.0, mean_qqc(a, b, y, f)};
  for (long i = 0; i <= steps; ++i) {
    const double md = -0.5 + static_cast<double>(i) * step;
    double s = 0;
    for (Eigen::Index r = 0; r < y.size(); ++r) s += qqc(a, b, y[r] - (1 - md) * f[r]);
    s /= static_cast<double>(y.size());
    if (s < best.loss) best = {md, s};
  }
  return best;
}

// Greedy forward selection with replacement, written from the definition for
// cross-checking the library's implementation.
inline std::vector<std::size_t> greedy_select(const std::vector<VectorXd>& preds, const VectorXd& y,
                                              const std::function<double(const VectorXd&)>& score) {
  std::vector<std::size_t> members;
  VectorXd sum = VectorXd::Zero(y.size());
  double current = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t m = 0; m < preds.size(); ++m) {
      const double s = score((sum + preds[m]) / static_cast<double>(members.size() + 1));
      if (s < best) best = s, pick = m;
    }
    if (!(best < current)) break;
    current = best;
    members.push_back(pick);
    sum += preds[pick];
  }
  return members;
}

inline double pct_diff(double a, double b) { return 100.0 * (a - b) / a; }

}  // namespace oracle
