#ifndef RFFSVM_PIPELINE_HPP
#define RFFSVM_PIPELINE_HPP

#include "rffsvm/core.hpp"
#include "rffsvm/dataset.hpp"
#include "rffsvm/kernels.hpp"
#include "rffsvm/normalizer.hpp"
#include "rffsvm/random_features.hpp"
#include "rffsvm/svm.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rffsvm {

enum class ExperimentMode { exact_kernel, random_features };

inline std::string_view mode_name(ExperimentMode m) {
  return m == ExperimentMode::exact_kernel ? "exact_kernel" : "random_features";
}

inline ExperimentMode parse_mode(std::string_view s) {
  if (s == "exact_kernel" || s == "exact") return ExperimentMode::exact_kernel;
  if (s == "random_features" || s == "rff") return ExperimentMode::random_features;
  throw Error("unknown mode '" + std::string(s) + "' (expected exact_kernel|random_features)");
}

struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::linear();
  ExperimentMode mode = ExperimentMode::exact_kernel;
  /// Random-feature dimension; only meaningful in random_features mode.
  std::size_t target_dim = 0;
  SvmConfig svm;
  std::uint64_t map_seed = 0;
  /// Build a fresh map per fold from map_seed + fold instead of sharing one.
  bool reseed_per_fold = false;
  unsigned threads = 1;

  void validate() const {
    svm.validate();
    if (mode == ExperimentMode::random_features) {
      if (!is_shift_invariant(kernel.family())) throw Error("linear kernel needs no random features");
      if (target_dim == 0) throw Error("random_features mode needs M >= 1");
    } else if (target_dim != 0) {
      throw Error("M is only valid in random_features mode");
    }
  }

  /// Non-fatal configuration remarks for an input of dimension N.
  std::vector<std::string> warnings(std::size_t input_dim) const {
    std::vector<std::string> out;
    if (mode == ExperimentMode::random_features && target_dim >= input_dim)
      out.push_back("M = " + std::to_string(target_dim) + " is not below the input dimension N = " +
                    std::to_string(input_dim) + "; random features give no reduction");
    return out;
  }
};

// ---------------------------------------------------------------------------
// Predictor: normalizer + optional feature map + one-vs-rest SVM

/**
 * Everything needed to classify raw feature vectors.
 *
 * Kernel-mode predictors keep only the (normalized) training rows that are
 * support vectors for at least one class; the per-class coefficients are
 * indexed over those rows.
 */
struct Predictor {
  ExperimentMode mode = ExperimentMode::exact_kernel;
  KernelSpec kernel = KernelSpec::linear();
  Normalizer normalizer;
  std::shared_ptr<const RandomFeatureMap> map;
  SvmModel svm;
  Matrix support_vectors;

  std::size_t input_dim() const { return normalizer.dim(); }
  const std::vector<std::string>& classes() const { return svm.class_labels; }

  std::vector<Prediction> predict(const Matrix& X, unsigned threads = 1) const {
    if (static_cast<std::size_t>(X.cols()) != input_dim())
      throw Error("predictor expects " + std::to_string(input_dim()) + " features, got " +
                  std::to_string(X.cols()));
    Matrix Z = normalizer.apply(X);
    if (map) Z = transform(*map, Z, threads);
    std::vector<Prediction> out(static_cast<std::size_t>(X.rows()));
    if (svm.mode == SvmMode::linear_explicit) {
      for (Eigen::Index i = 0; i < Z.rows(); ++i) out[static_cast<std::size_t>(i)] = rffsvm::predict(svm, row_span(Z, i));
    } else {
      const GramMatrix K = gram_matrix(kernel, Z, support_vectors, threads);
      for (Eigen::Index i = 0; i < Z.rows(); ++i)
        out[static_cast<std::size_t>(i)] = rffsvm::predict(svm, row_span(K.values(), i));
    }
    return out;
  }
};

namespace detail {

/// Drops training rows that carry no weight in any class.
inline void compact_support(SvmModel& model, const Matrix& train, Matrix& support) {
  std::set<std::size_t> used;
  for (const auto& m : model.kernel) used.insert(m.support_indices.begin(), m.support_indices.end());
  const std::vector<std::size_t> keep(used.begin(), used.end());
  support.resize(static_cast<Eigen::Index>(keep.size()), train.cols());
  for (std::size_t k = 0; k < keep.size(); ++k)
    support.row(static_cast<Eigen::Index>(k)) = train.row(static_cast<Eigen::Index>(keep[k]));
  for (auto& m : model.kernel) {
    Vector coef(static_cast<Eigen::Index>(keep.size()));
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      coef[static_cast<Eigen::Index>(k)] = m.coefficients[static_cast<Eigen::Index>(keep[k])];
      if (coef[static_cast<Eigen::Index>(k)] != 0.0) idx.push_back(k);
    }
    m.coefficients = std::move(coef);
    m.support_indices = std::move(idx);
  }
}

}  // namespace detail

/// Normalizes, optionally maps, and trains on the given rows.
inline Predictor train_predictor(const Matrix& X, std::span<const std::string> labels,
                                 const ExperimentConfig& config,
                                 std::shared_ptr<const RandomFeatureMap> shared_map = nullptr) {
  config.validate();
  Predictor p;
  p.mode = config.mode;
  p.kernel = config.kernel;
  p.normalizer = Normalizer::fit(X);
  Matrix Z = p.normalizer.apply(X);
  SvmConfig svm = config.svm;
  svm.threads = config.threads;

  if (config.mode == ExperimentMode::random_features) {
    if (shared_map) {
      if (shared_map->input_dim() != static_cast<std::size_t>(X.cols()) ||
          !(shared_map->spec() == config.kernel) || shared_map->target_dim() != config.target_dim)
        throw Error("shared feature map does not match the experiment configuration");
      p.map = std::move(shared_map);
    } else {
      p.map = std::make_shared<const RandomFeatureMap>(
          build_map(config.kernel, static_cast<std::size_t>(X.cols()), config.target_dim, config.map_seed));
    }
    p.svm = train_multiclass_linear(transform(*p.map, Z, config.threads), labels, svm);
  } else if (config.kernel.family() == KernelFamily::linear) {
    // The exact linear kernel is trained in the primal; identical decision
    // function, no n x n Gram matrix.
    p.svm = train_multiclass_linear(Z, labels, svm);
  } else {
    const GramMatrix K = gram_matrix(config.kernel, Z, Z, config.threads);
    p.svm = train_multiclass_kernel(K, labels, svm);
    detail::compact_support(p.svm, Z, p.support_vectors);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reports

struct StorageReport {
  /// Bytes of one serialized map descriptor (version, family, gamma, N, M, seed).
  static constexpr std::size_t kDescriptorBytes = 6 * 8;
  std::size_t input_bytes = 0;
  std::size_t rff_bytes = 0;
  double ratio = 0.0;
};

/// 8-byte-per-value accounting of n x N inputs versus n x M random features.
inline StorageReport storage_report(std::size_t input_dim, std::size_t target_dim, std::size_t rows) {
  if (input_dim == 0 || target_dim == 0 || rows == 0) throw Error("storage_report: sizes must be positive");
  StorageReport r;
  r.input_bytes = 8 * rows * input_dim;
  r.rff_bytes = 8 * rows * target_dim + StorageReport::kDescriptorBytes;
  r.ratio = static_cast<double>(input_dim) / static_cast<double>(target_dim);
  return r;
}

struct FoldResult {
  int fold = 0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  /// Binary problems that hit max_iterations.
  std::size_t unconverged = 0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  /// Row-major confusion counts over the report's class order.
  std::vector<std::size_t> confusion;
};

struct EvalReport {
  std::vector<std::string> class_labels;
  double overall_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<FoldResult> per_fold;
  std::size_t input_dim = 0;
  std::size_t effective_dim = 0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  std::optional<StorageReport> storage;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : confusion)
      for (auto v : row) t += v;
    return t;
  }
  std::size_t correct() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i) c += confusion[i][i];
    return c;
  }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline const std::vector<int>& folds_of(const Dataset& ds) {
  if (!ds.fold_assignment) throw Error("dataset has no fold assignment");
  if (ds.fold_assignment->size() != ds.size()) throw Error("fold assignment length mismatch");
  return *ds.fold_assignment;
}

}  // namespace detail

/// Fold indices present in the dataset, ascending.
inline std::vector<int> fold_indices(const Dataset& ds) {
  const auto& f = detail::folds_of(ds);
  const std::set<int> s(f.begin(), f.end());
  return {s.begin(), s.end()};
}

/// The shared map used by run_experiment, when one applies.
inline std::shared_ptr<const RandomFeatureMap> experiment_map(const Dataset& ds,
                                                              const ExperimentConfig& config) {
  if (config.mode != ExperimentMode::random_features || config.reseed_per_fold) return nullptr;
  return std::make_shared<const RandomFeatureMap>(
      build_map(config.kernel, ds.dim(), config.target_dim, config.map_seed));
}

/// Trains on every fold but `fold` and evaluates on `fold`. Confusion counts
/// use `classes` as the row/column order.
inline FoldResult evaluate_fold(const Dataset& ds, const ExperimentConfig& config, int fold,
                                const std::vector<std::string>& classes,
                                std::shared_ptr<const RandomFeatureMap> shared_map = nullptr) {
  const auto& folds = detail::folds_of(ds);
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < ds.size(); ++i) (folds[i] == fold ? test_rows : train_rows).push_back(i);
  if (test_rows.empty()) throw Error("fold " + std::to_string(fold) + " has an empty test split");
  const Dataset train = ds.subset(train_rows);
  const Dataset test = ds.subset(test_rows);
  if (class_order(train.labels).size() < 2)
    throw Error("fold " + std::to_string(fold) + ": training split has a single class");

  ExperimentConfig cfg = config;
  if (cfg.mode == ExperimentMode::random_features && !shared_map) {
    const auto seed = cfg.reseed_per_fold ? cfg.map_seed + static_cast<std::uint64_t>(fold) : cfg.map_seed;
    shared_map = std::make_shared<const RandomFeatureMap>(build_map(cfg.kernel, ds.dim(), cfg.target_dim, seed));
  }

  FoldResult r;
  r.fold = fold;
  r.train_count = train.size();
  r.test_count = test.size();
  auto t0 = std::chrono::steady_clock::now();
  Predictor p;
  try {
    p = train_predictor(train.features, train.labels, cfg, shared_map);
  } catch (const Error& e) {
    throw Error("fold " + std::to_string(fold) + ": " + e.what());
  }
  r.train_seconds = detail::seconds_since(t0);
  for (const auto& m : p.svm.linear) r.unconverged += m.diagnostics.converged ? 0 : 1;
  for (const auto& m : p.svm.kernel) r.unconverged += m.diagnostics.converged ? 0 : 1;

  t0 = std::chrono::steady_clock::now();
  const auto preds = p.predict(test.features, cfg.threads);
  r.test_seconds = detail::seconds_since(t0);

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index.emplace(classes[c], c);
  const std::size_t C = classes.size();
  r.confusion.assign(C * C, 0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto t = index.find(test.labels[i]);
    const auto q = index.find(preds[i].label);
    if (t == index.end() || q == index.end()) throw Error("label outside the report class order");
    ++r.confusion[t->second * C + q->second];
    if (test.labels[i] == preds[i].label) ++r.correct;
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.test_count);
  return r;
}

/// Combines fold results (in any order) into a report; folds are sorted by index.
inline EvalReport aggregate_folds(std::vector<FoldResult> folds, std::vector<std::string> classes,
                                  std::size_t input_dim, const ExperimentConfig& config, std::size_t rows) {
  std::sort(folds.begin(), folds.end(), [](const auto& a, const auto& b) { return a.fold < b.fold; });
  EvalReport rep;
  rep.class_labels = std::move(classes);
  const std::size_t C = rep.class_labels.size();
  rep.confusion.assign(C, std::vector<std::size_t>(C, 0));
  std::size_t correct = 0, total = 0;
  for (const auto& f : folds) {
    for (std::size_t a = 0; a < C; ++a)
      for (std::size_t b = 0; b < C; ++b) rep.confusion[a][b] += f.confusion[a * C + b];
    correct += f.correct;
    total += f.test_count;
    rep.train_seconds += f.train_seconds;
    rep.test_seconds += f.test_seconds;
  }
  rep.overall_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  rep.per_class_accuracy.resize(C);
  for (std::size_t a = 0; a < C; ++a) {
    std::size_t row = 0;
    for (auto v : rep.confusion[a]) row += v;
    rep.per_class_accuracy[a] = row ? static_cast<double>(rep.confusion[a][a]) / static_cast<double>(row) : 0.0;
  }
  rep.per_fold = std::move(folds);
  rep.input_dim = input_dim;
  rep.effective_dim = config.mode == ExperimentMode::random_features ? config.target_dim : input_dim;
  if (config.mode == ExperimentMode::random_features)
    rep.storage = storage_report(input_dim, config.target_dim, rows);
  return rep;
}

/// Cross-validated evaluation over the dataset's folds. Overall accuracy is
/// total correct over total test segments.
inline EvalReport run_experiment(const Dataset& ds, const ExperimentConfig& config) {
  config.validate();
  const auto folds = fold_indices(ds);
  if (folds.size() < 2) throw Error("cross-validation needs at least 2 folds");
  const auto classes = class_order(ds.labels);
  const auto shared = experiment_map(ds, config);
  std::vector<FoldResult> results;
  for (int f : folds) results.push_back(evaluate_fold(ds, config, f, classes, shared));
  return aggregate_folds(std::move(results), classes, ds.dim(), config, ds.size());
}

inline std::vector<std::pair<std::size_t, EvalReport>> sweep_M(const Dataset& ds, const ExperimentConfig& base,
                                                               std::span<const std::size_t> m_values) {
  if (m_values.empty()) throw Error("sweep needs at least one M value");
  if (base.mode != ExperimentMode::random_features) throw Error("sweep requires random_features mode");
  std::vector<std::pair<std::size_t, EvalReport>> out;
  for (auto M : m_values) {
    ExperimentConfig cfg = base;
    cfg.target_dim = M;
    out.emplace_back(M, run_experiment(ds, cfg));
  }
  return out;
}

struct GridCell {
  double gamma = 0.0;
  double c = 0.0;
  double accuracy = 0.0;
};

struct GridResult {
  double best_gamma = 0.0;
  double best_c = 0.0;
  double best_accuracy = 0.0;
  /// Sorted by gamma, then C.
  std::vector<GridCell> table;
};

/// Cross-validated grid over (gamma, C). The best cell maximizes accuracy;
/// ties go to the smaller gamma, then the smaller C. For the linear family
/// the gamma grid is ignored and reported as 0.
inline GridResult grid_search(const Dataset& ds, const ExperimentConfig& base, KernelFamily family,
                              std::span<const double> gamma_grid, std::span<const double> c_grid) {
  if (c_grid.empty()) throw Error("grid search needs a non-empty C grid");
  std::set<double> gammas;
  if (family == KernelFamily::linear) gammas.insert(0.0);
  else {
    if (gamma_grid.empty()) throw Error("grid search needs a non-empty gamma grid");
    gammas.insert(gamma_grid.begin(), gamma_grid.end());
  }
  const std::set<double> cs(c_grid.begin(), c_grid.end());

  GridResult res;
  bool have = false;
  for (double g : gammas) {
    for (double c : cs) {
      ExperimentConfig cfg = base;
      cfg.kernel = family == KernelFamily::linear ? KernelSpec::linear() : KernelSpec(family, g);
      cfg.svm.regularization_c = c;
      const auto rep = run_experiment(ds, cfg);
      res.table.push_back({g, c, rep.overall_accuracy});
      if (!have || rep.overall_accuracy > res.best_accuracy) {
        have = true;
        res.best_gamma = g;
        res.best_c = c;
        res.best_accuracy = rep.overall_accuracy;
      }
    }
  }
  return res;
}

}  // namespace rffsvm

#endif  // RFFSVM_PIPELINE_HPP
