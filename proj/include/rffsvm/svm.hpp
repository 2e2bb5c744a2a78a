#ifndef RFFSVM_SVM_HPP
#define RFFSVM_SVM_HPP

// Soft-margin SVMs (L1 hinge, L2 regularizer) solved by dual coordinate
// descent on the box-constrained dual
//
//   max_a  sum(a) - 1/2 a^T Q a,   0 <= a_i <= C,
//
// with the bias folded in: Q_ij = y_i y_j (x_i.x_j + 1) for the linear
// solver and Q_ij = y_i y_j (K_ij + 1) for the precomputed-kernel solver.
// Without an equality constraint each coordinate has a closed-form update.

#include "rffsvm/core.hpp"
#include "rffsvm/kernels.hpp"
#include "rffsvm/random_features.hpp"

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rffsvm {

struct SvmConfig {
  double regularization_c = 100.0;
  /// Stop when the largest projected-gradient magnitude of the dual is below this.
  double tolerance = 1e-4;
  /// Maximum number of full coordinate sweeps.
  int max_iterations = 1000;
  /// Workers for independent one-vs-rest problems.
  unsigned threads = 1;
  /// Random per-epoch coordinate order (seeded); off keeps the cyclic order.
  bool shuffle = false;
  std::uint64_t shuffle_seed = 0;
  /// Linear solver only: skip coordinates pinned at a bound until the active
  /// set converges, then re-check every coordinate.
  bool shrinking = false;

  void validate() const {
    if (!(regularization_c > 0.0) || !std::isfinite(regularization_c))
      throw Error("SVM regularization C must be a finite value > 0");
    if (!(tolerance > 0.0)) throw Error("SVM tolerance must be > 0");
    if (max_iterations < 1) throw Error("SVM max_iterations must be >= 1");
  }
};

struct TrainDiagnostics {
  bool converged = false;
  int epochs = 0;
  /// Max projected-gradient magnitude at the returned solution.
  double max_violation = 0.0;
  double dual_objective = 0.0;
  /// Dual objective after each epoch.
  std::vector<double> dual_history;
};

struct BinaryLinearModel {
  /// D feature weights followed by the folded bias.
  Vector weights;
  std::size_t support_count = 0;
  /// Dual variables in [0, C].
  Vector alphas;
  TrainDiagnostics diagnostics;

  double decision(std::span<const double> x) const {
    const auto D = weights.size() - 1;
    if (static_cast<Eigen::Index>(x.size()) != D)
      throw Error("linear model expects " + std::to_string(D) + " features, got " +
                  std::to_string(x.size()));
    double s = 0.0;
    for (Eigen::Index j = 0; j < D; ++j) s += weights[j] * x[static_cast<std::size_t>(j)];
    return s + weights[D];
  }
};

struct BinaryKernelModel {
  /// alpha_i * y_i for every training point; |value| <= C.
  Vector coefficients;
  std::vector<std::size_t> support_indices;
  TrainDiagnostics diagnostics;

  /// f(x) = sum_i coef_i (K(x_i, x) + 1), given the kernel row K(x_i, x).
  double decision(std::span<const double> kernel_row) const {
    if (static_cast<Eigen::Index>(kernel_row.size()) != coefficients.size())
      throw Error("kernel row has " + std::to_string(kernel_row.size()) + " entries, model has " +
                  std::to_string(coefficients.size()) + " training points");
    double s = 0.0;
    for (const auto i : support_indices) s += coefficients[static_cast<Eigen::Index>(i)] * (kernel_row[i] + 1.0);
    return s;
  }
};

namespace detail {

inline void check_binary_labels(std::span<const int> y, std::size_t n) {
  if (y.size() != n)
    throw Error("label count " + std::to_string(y.size()) + " does not match " + std::to_string(n) +
                " training rows");
  if (n < 2) throw Error("SVM training needs at least 2 points");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error("binary labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error("SVM training needs both classes present (got a single class)");
}

inline double project_gradient(double g, double alpha, double C) {
  if (alpha <= 0.0) return std::min(g, 0.0);
  if (alpha >= C) return std::max(g, 0.0);
  return g;
}

/// Coordinate order for one epoch.
class SweepOrder {
 public:
  SweepOrder(std::size_t n, const SvmConfig& cfg) : order_(n), rng_(cfg.shuffle_seed), shuffle_(cfg.shuffle) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
  const std::vector<std::size_t>& next() {
    permute(order_);
    return order_;
  }

  /// Applies this epoch's permutation (if any) to an explicit index list.
  void permute(std::vector<std::size_t>& idx) {
    if (!shuffle_) return;
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng_.half_open01() * static_cast<double>(i));
      std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
  }

 private:
  std::vector<std::size_t> order_;
  UniformStream rng_;
  bool shuffle_;
};

inline Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

inline double augmented_dot(const Vector& w, std::span<const double> x) {
  const auto D = static_cast<Eigen::Index>(x.size());
  return w.head(D).dot(as_vector(x)) + w[D];
}

}  // namespace detail

/// Max projected-gradient magnitude of the linear dual at (alpha, w).
inline double linear_kkt_violation(const Matrix& X, std::span<const int> y, const Vector& alphas,
                                   const Vector& w, double C) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double g = y[static_cast<std::size_t>(i)] * detail::augmented_dot(w, row_span(X, i)) - 1.0;
    worst = std::max(worst, std::abs(detail::project_gradient(g, alphas[i], C)));
  }
  return worst;
}

/// sum(alpha) - 1/2 |w|^2 with w = sum alpha_i y_i [x_i, 1].
inline double linear_dual_objective(const Matrix& X, std::span<const int> y, const Vector& alphas) {
  Vector w = Vector::Zero(X.cols() + 1);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double s = alphas[i] * y[static_cast<std::size_t>(i)];
    w.head(X.cols()) += s * X.row(i).transpose();
    w[X.cols()] += s;
  }
  return alphas.sum() - 0.5 * w.squaredNorm();
}

inline double linear_primal_objective(const Matrix& X, std::span<const int> y, const Vector& w,
                                      double C) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    loss += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * detail::augmented_dot(w, row_span(X, i)));
  return 0.5 * w.squaredNorm() + C * loss;
}

inline BinaryLinearModel train_binary_linear(const Matrix& X, std::span<const int> y,
                                             const SvmConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(X.rows());
  detail::check_binary_labels(y, n);
  if (X.cols() < 1) throw Error("SVM training needs at least one feature");
  if (!all_finite(X)) throw Error("non-finite feature value in SVM training data");

  const Eigen::Index D = X.cols();
  const double C = config.regularization_c;
  Vector w = Vector::Zero(D + 1);
  Vector alpha = Vector::Zero(static_cast<Eigen::Index>(n));
  Vector qdiag(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < X.rows(); ++i) qdiag[i] = X.row(i).squaredNorm() + 1.0;

  BinaryLinearModel model;
  auto& diag = model.diagnostics;
  detail::SweepOrder order(n, config);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> active = all, kept;
  const double inf = std::numeric_limits<double>::infinity();
  // Shrinking thresholds from the previous sweep (liblinear's rule).
  double upper = inf, lower = -inf;
  while (diag.epochs < config.max_iterations) {
    ++diag.epochs;
    double sweep_violation = 0.0, pg_max = -inf, pg_min = inf;
    if (config.shrinking) order.permute(active);
    kept.clear();
    for (const auto i : config.shrinking ? active : order.next()) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto xi = row_span(X, ii);
      const double g = y[i] * detail::augmented_dot(w, xi) - 1.0;
      if (config.shrinking) {
        if ((alpha[ii] <= 0.0 && g > upper) || (alpha[ii] >= C && g < lower)) continue;
        kept.push_back(i);
      }
      const double pg = detail::project_gradient(g, alpha[ii], C);
      sweep_violation = std::max(sweep_violation, std::abs(pg));
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[ii];
      alpha[ii] = std::clamp(old - g / qdiag[ii], 0.0, C);
      const double step = (alpha[ii] - old) * y[i];
      if (step == 0.0) continue;
      w.head(D) += step * detail::as_vector(xi);
      w[D] += step;
    }
    diag.dual_history.push_back(alpha.sum() - 0.5 * w.squaredNorm());
    if (config.shrinking) {
      active.swap(kept);
      upper = pg_max > 0.0 ? pg_max : inf;
      lower = pg_min < 0.0 ? pg_min : -inf;
    }
    if (sweep_violation > config.tolerance) continue;
    // The in-sweep check sees stale gradients; confirm at the final point.
    if (linear_kkt_violation(X, y, alpha, w, C) <= config.tolerance) {
      diag.converged = true;
      break;
    }
    if (config.shrinking) {
      active = all;
      upper = inf;
      lower = -inf;
    }
  }
  diag.max_violation = linear_kkt_violation(X, y, alpha, w, C);
  diag.dual_objective = diag.dual_history.back();
  model.support_count = static_cast<std::size_t>((alpha.array() > 0.0).count());
  model.weights = std::move(w);
  model.alphas = std::move(alpha);
  return model;
}

namespace detail {

inline void check_gram(const GramMatrix& gram, std::size_t n) {
  if (!gram.is_square())
    throw Error("kernel SVM needs a square Gram matrix, got " + std::to_string(gram.rows()) + "x" +
                std::to_string(gram.cols()));
  if (static_cast<std::size_t>(gram.rows()) != n)
    throw Error("Gram matrix size does not match label count");
  if (!all_finite(gram.values())) throw Error("non-finite Gram matrix entry");
}

}  // namespace detail

/// sum(alpha) - 1/2 alpha^T Q alpha with Q_ij = y_i y_j (K_ij + 1).
inline double kernel_dual_objective(const GramMatrix& K, std::span<const int> y, const Vector& alphas) {
  const auto n = K.rows();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alphas[i] == 0.0) continue;
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      row += alphas[j] * y[static_cast<std::size_t>(j)] * (K(i, j) + 1.0);
    quad += alphas[i] * y[static_cast<std::size_t>(i)] * row;
  }
  return alphas.sum() - 0.5 * quad;
}

/// Training-point decision values (K + 1) (alpha .* y).
inline Vector kernel_training_decisions(const GramMatrix& K, std::span<const int> y,
                                        const Vector& alphas) {
  const auto n = K.rows();
  Vector f = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = alphas[j] * y[static_cast<std::size_t>(j)];
    if (s == 0.0) continue;
    for (Eigen::Index i = 0; i < n; ++i) f[i] += s * (K(i, j) + 1.0);
  }
  return f;
}

inline double kernel_primal_objective(const GramMatrix& K, std::span<const int> y,
                                      const Vector& alphas, double C) {
  const Vector f = kernel_training_decisions(K, y, alphas);
  double reg = 0.0, loss = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    reg += alphas[i] * yi * f[i];
    loss += std::max(0.0, 1.0 - yi * f[i]);
  }
  return 0.5 * reg + C * loss;
}

inline double kernel_kkt_violation(const GramMatrix& K, std::span<const int> y, const Vector& alphas,
                                   double C) {
  const Vector f = kernel_training_decisions(K, y, alphas);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const double g = y[static_cast<std::size_t>(i)] * f[i] - 1.0;
    worst = std::max(worst, std::abs(detail::project_gradient(g, alphas[i], C)));
  }
  return worst;
}

/// Kernel SVM over a precomputed training Gram matrix. Returns the raw
/// dual variables through `alphas_out` when non-null.
inline BinaryKernelModel train_binary_kernel(const GramMatrix& gram, std::span<const int> y,
                                             const SvmConfig& config, Vector* alphas_out = nullptr) {
  config.validate();
  const auto n = y.size();
  detail::check_binary_labels(y, n);
  detail::check_gram(gram, n);

  const double C = config.regularization_c;
  const Matrix& K = gram.values();
  const auto nn = static_cast<Eigen::Index>(n);
  Vector alpha = Vector::Zero(nn);
  // grad_i = (Q alpha)_i - 1
  Vector grad = Vector::Constant(nn, -1.0);
  Vector ylab(nn);
  for (Eigen::Index i = 0; i < nn; ++i) ylab[i] = y[static_cast<std::size_t>(i)];

  BinaryKernelModel model;
  auto& diag = model.diagnostics;
  detail::SweepOrder order(n, config);
  auto dual = [&] { return alpha.sum() - 0.5 * alpha.dot(grad + Vector::Ones(nn)); };
  while (diag.epochs < config.max_iterations) {
    ++diag.epochs;
    double sweep_violation = 0.0;
    for (const auto i : order.next()) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double g = grad[ii];
      const double pg = detail::project_gradient(g, alpha[ii], C);
      sweep_violation = std::max(sweep_violation, std::abs(pg));
      if (pg == 0.0) continue;
      const double qii = K(ii, ii) + 1.0;
      if (!(qii > 0.0)) throw Error("Gram matrix has a non-positive diagonal entry");
      const double old = alpha[ii];
      alpha[ii] = std::clamp(old - g / qii, 0.0, C);
      const double delta = alpha[ii] - old;
      if (delta == 0.0) continue;
      const double s = delta * y[i];
      grad.array() += s * ylab.array() * (K.row(ii).transpose().array() + 1.0);
    }
    diag.dual_history.push_back(dual());
    if (sweep_violation <= config.tolerance) {
      // Incremental gradients drift; recompute before declaring convergence.
      grad = kernel_training_decisions(gram, y, alpha);
      for (Eigen::Index i = 0; i < nn; ++i) grad[i] = y[static_cast<std::size_t>(i)] * grad[i] - 1.0;
      if (kernel_kkt_violation(gram, y, alpha, C) <= config.tolerance) {
        diag.converged = true;
        break;
      }
    }
  }
  diag.max_violation = kernel_kkt_violation(gram, y, alpha, C);
  diag.dual_objective = diag.dual_history.back();

  model.coefficients.resize(nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    model.coefficients[i] = alpha[i] * y[static_cast<std::size_t>(i)];
    if (alpha[i] > 0.0) model.support_indices.push_back(static_cast<std::size_t>(i));
  }
  if (alphas_out) *alphas_out = std::move(alpha);
  return model;
}

// ---------------------------------------------------------------------------
// Multi-class (one-vs-rest)

enum class SvmMode { linear_explicit, kernel_precomputed };

/// Distinct labels in first-appearance order.
inline std::vector<std::string> class_order(std::span<const std::string> labels) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& l : labels)
    if (seen.emplace(l, order.size()).second) order.push_back(l);
  return order;
}

struct SvmModel {
  std::vector<std::string> class_labels;
  SvmMode mode = SvmMode::linear_explicit;
  SvmConfig config;
  std::vector<BinaryLinearModel> linear;  // mode == linear_explicit
  std::vector<BinaryKernelModel> kernel;  // mode == kernel_precomputed

  std::size_t class_count() const { return class_labels.size(); }
  std::size_t binary_count() const {
    return mode == SvmMode::linear_explicit ? linear.size() : kernel.size();
  }
};

struct Prediction {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> scores;
};

/// Index of the largest value; the earliest index wins ties.
inline std::size_t argmax_first(std::span<const double> values) {
  if (values.empty()) throw Error("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

namespace detail {

inline std::vector<std::vector<int>> one_vs_rest_targets(std::span<const std::string> labels,
                                                         const std::vector<std::string>& classes) {
  std::vector<std::vector<int>> targets(classes.size(), std::vector<int>(labels.size(), -1));
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == classes[c]) targets[c][i] = 1;
  return targets;
}

inline std::vector<std::string> checked_classes(std::span<const std::string> labels) {
  auto classes = class_order(labels);
  if (classes.size() < 2)
    throw Error("multi-class training needs at least 2 distinct labels, got " +
                std::to_string(classes.size()));
  return classes;
}

}  // namespace detail

inline SvmModel train_multiclass_linear(const Matrix& X, std::span<const std::string> labels,
                                        const SvmConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw Error("feature rows and labels differ in count");
  SvmModel model;
  model.class_labels = detail::checked_classes(labels);
  model.mode = SvmMode::linear_explicit;
  model.config = config;
  const auto targets = detail::one_vs_rest_targets(labels, model.class_labels);
  model.linear.resize(model.class_labels.size());
  parallel_for(model.class_labels.size(), config.threads, [&](std::size_t c) {
    model.linear[c] = train_binary_linear(X, targets[c], config);
  });
  return model;
}

inline SvmModel train_multiclass_kernel(const GramMatrix& gram, std::span<const std::string> labels,
                                        const SvmConfig& config) {
  config.validate();
  SvmModel model;
  model.class_labels = detail::checked_classes(labels);
  model.mode = SvmMode::kernel_precomputed;
  model.config = config;
  const auto targets = detail::one_vs_rest_targets(labels, model.class_labels);
  model.kernel.resize(model.class_labels.size());
  parallel_for(model.class_labels.size(), config.threads, [&](std::size_t c) {
    model.kernel[c] = train_binary_kernel(gram, targets[c], config);
  });
  return model;
}

inline Prediction make_prediction(const SvmModel& model, std::vector<double> scores) {
  Prediction p;
  p.class_index = argmax_first(scores);
  p.label = model.class_labels[p.class_index];
  p.scores = std::move(scores);
  return p;
}

/// Linear mode: `input` is a feature vector. Kernel mode: `input` is the
/// kernel row K(x_i, x) over the training points.
inline Prediction predict(const SvmModel& model, std::span<const double> input) {
  std::vector<double> scores(model.class_count());
  for (std::size_t c = 0; c < scores.size(); ++c)
    scores[c] = model.mode == SvmMode::linear_explicit ? model.linear[c].decision(input)
                                                       : model.kernel[c].decision(input);
  return make_prediction(model, std::move(scores));
}

}  // namespace rffsvm

#endif  // RFFSVM_SVM_HPP
