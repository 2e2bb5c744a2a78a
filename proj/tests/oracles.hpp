// Independent reference computations used by the test suites. Nothing here
// calls into the solver or sampling code it is used to check.
#ifndef RFFSVM_TESTS_ORACLES_HPP
#define RFFSVM_TESTS_ORACLES_HPP

#include "rffsvm/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using rffsvm::Matrix;
using rffsvm::Vector;

/// Dense Q_ij = y_i y_j (K_ij + 1).
inline Matrix dual_hessian(const Matrix& K, const std::vector<int>& y) {
  const auto n = K.rows();
  Matrix Q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) Q(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * (K(i, j) + 1.0);
  return Q;
}

inline double dual_value(const Matrix& Q, const Vector& a) { return a.sum() - 0.5 * a.dot(Q * a); }

/// Linear-kernel Gram of the raw rows.
inline Matrix linear_gram(const Matrix& X) { return X * X.transpose(); }

struct ReferenceSolution {
  Vector alpha;
  double dual = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
};

/// Accelerated projected gradient (FISTA with adaptive restart) on
/// max sum(a) - 1/2 a^T Q a, 0 <= a <= C. Slow but simple.
inline ReferenceSolution projected_gradient_dual(const Matrix& Q, double C, double tol = 1e-10,
                                                 int max_iter = 2'000'000) {
  const auto n = Q.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(Q), Eigen::EigenvaluesOnly);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / L;
  auto project = [C](Vector v) { return v.cwiseMax(0.0).cwiseMin(C).eval(); };
  auto pg_norm = [&](const Vector& a) {
    const Vector g = Q * a - Vector::Ones(n);  // gradient of the minimized form
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double pg = g[i];
      if (a[i] <= 0.0) pg = std::min(pg, 0.0);
      else if (a[i] >= C) pg = std::max(pg, 0.0);
      worst = std::max(worst, std::abs(pg));
    }
    return worst;
  };

  Vector a = Vector::Zero(n), z = a;
  double t = 1.0;
  double prev = dual_value(Q, a);
  ReferenceSolution out;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector g = Q * z - Vector::Ones(n);
    Vector next = project(z - step * g);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double val = dual_value(Q, next);
    if (val < prev) {  // restart momentum
      z = a;
      t = 1.0;
      continue;
    }
    z = next + ((t - 1.0) / t_next) * (next - a);
    a = std::move(next);
    t = t_next;
    prev = val;
    out.iterations = it;
    if (it % 50 == 0 && pg_norm(a) <= tol) break;
  }
  out.alpha = a;
  out.dual = dual_value(Q, a);
  out.projected_gradient = pg_norm(a);
  return out;
}

/// Best dual value over a uniform grid of `steps` points per coordinate (n small).
inline std::pair<double, Vector> grid_dual(const Matrix& Q, double C, int steps) {
  const auto n = Q.rows();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double best = -std::numeric_limits<double>::infinity();
  Vector best_a(n), a(n);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) a[i] = C * idx[static_cast<std::size_t>(i)] / (steps - 1);
    const double v = dual_value(Q, a);
    if (v > best) {
      best = v;
      best_a = a;
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == steps) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return {best, best_a};
}

/// Two isotropic 2-D Gaussian blobs with labels -1 / +1.
inline void blobs_2d(std::size_t per_class, double gap, std::uint64_t seed, Matrix& X, std::vector<int>& y) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  X.resize(static_cast<Eigen::Index>(2 * per_class), 2);
  y.clear();
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = i < per_class ? -1 : 1;
    X(static_cast<Eigen::Index>(i), 0) = nd(gen) + 0.5 * gap * label;
    X(static_cast<Eigen::Index>(i), 1) = nd(gen) + 0.5 * gap * label;
    y.push_back(label);
  }
}

/// Random matrix with entries drawn from N(0, scale^2).
inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = nd(gen);
  return M;
}

inline double min_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Nearest class-mean classifier accuracy on the training data itself.
inline double nearest_centre_accuracy(const Matrix& X, const std::vector<std::string>& labels) {
  std::vector<std::string> names;
  std::vector<Vector> sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(names.begin(), names.end(), labels[i]);
    std::size_t c = static_cast<std::size_t>(it - names.begin());
    if (it == names.end()) {
      names.push_back(labels[i]);
      sums.push_back(Vector::Zero(X.cols()));
      counts.push_back(0.0);
    }
    sums[c] += X.row(static_cast<Eigen::Index>(i)).transpose();
    counts[c] += 1.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < names.size(); ++c) {
      const double d = (X.row(static_cast<Eigen::Index>(i)).transpose() - sums[c] / counts[c]).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    correct += names[best] == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace oracle

#endif  // RFFSVM_TESTS_ORACLES_HPP
