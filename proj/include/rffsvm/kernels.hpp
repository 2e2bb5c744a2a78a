#ifndef RFFSVM_KERNELS_HPP
#define RFFSVM_KERNELS_HPP

#include "rffsvm/core.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace rffsvm {

enum class KernelFamily { linear, gaussian, laplacian, cauchy };

inline std::string_view family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplacian: return "laplacian";
    case KernelFamily::cauchy: return "cauchy";
  }
  throw Error("unknown kernel family");
}

inline KernelFamily parse_family(std::string_view name) {
  for (auto f : {KernelFamily::linear, KernelFamily::gaussian, KernelFamily::laplacian,
                 KernelFamily::cauchy})
    if (family_name(f) == name) return f;
  throw Error("unknown kernel family '" + std::string(name) +
              "' (expected linear|gaussian|laplacian|cauchy)");
}

inline bool is_shift_invariant(KernelFamily f) { return f != KernelFamily::linear; }

/**
 * Kernel family plus bandwidth.
 *
 * The bandwidth is validated once here so that evaluation loops do not
 * re-check it. Linear kernels carry no bandwidth.
 */
class KernelSpec {
 public:
  static KernelSpec linear() { return KernelSpec(KernelFamily::linear, 0.0); }

  KernelSpec(KernelFamily family, double gamma) : family_(family), gamma_(gamma) {
    if (family == KernelFamily::linear) {
      gamma_ = 0.0;
    } else if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw Error("kernel '" + std::string(family_name(family)) +
                  "' requires a finite gamma > 0");
    }
  }

  KernelFamily family() const { return family_; }
  /// Zero for the linear family.
  double gamma() const { return gamma_; }

  bool operator==(const KernelSpec&) const = default;

 private:
  KernelFamily family_;
  double gamma_;
};

/// K(x1, x2). The difference x1 - x2 is reduced left to right, so swapping
/// the arguments gives a bit-identical result.
inline double kernel_eval(const KernelSpec& spec, std::span<const double> x1,
                          std::span<const double> x2) {
  if (x1.size() != x2.size())
    throw Error("kernel_eval: dimension mismatch (" + std::to_string(x1.size()) + " vs " +
                std::to_string(x2.size()) + ")");
  if (x1.empty()) throw Error("kernel_eval: empty input vectors");
  if (!all_finite(x1) || !all_finite(x2)) throw Error("kernel_eval: non-finite input");

  const std::size_t n = x1.size();
  const double gamma = spec.gamma();
  double acc = 0.0;
  switch (spec.family()) {
    case KernelFamily::linear:
      for (std::size_t i = 0; i < n; ++i) acc += x1[i] * x2[i];
      return acc;
    case KernelFamily::gaussian:
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x1[i] - x2[i];
        acc += d * d;
      }
      return std::exp(-gamma * acc);
    case KernelFamily::laplacian:
      for (std::size_t i = 0; i < n; ++i) acc += std::abs(x1[i] - x2[i]);
      return std::exp(-gamma * acc);
    case KernelFamily::cauchy: {
      // Product of N factors underflows for large N; sum the logs instead.
      const double g2 = gamma * gamma;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x1[i] - x2[i];
        acc += std::log1p(g2 * d * d);
      }
      return std::exp(-acc);
    }
  }
  throw Error("unknown kernel family");
}

/// Kernel (Gram) matrix between the rows of X and the rows of Y.
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(Matrix values) : values_(std::move(values)) {}

  const Matrix& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  bool is_square() const { return rows() == cols(); }

 private:
  Matrix values_;
};

inline GramMatrix gram_matrix(const KernelSpec& spec, const Matrix& X, const Matrix& Y,
                              unsigned threads = 1) {
  if (X.cols() != Y.cols())
    throw Error("gram_matrix: column count mismatch (" + std::to_string(X.cols()) + " vs " +
                std::to_string(Y.cols()) + ")");
  if (X.rows() < 1 || Y.rows() < 1) throw Error("gram_matrix: empty input");
  Matrix K(X.rows(), Y.rows());
  parallel_for(static_cast<std::size_t>(X.rows()), threads, [&](std::size_t i) {
    const auto xi = row_span(X, static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < Y.rows(); ++j)
      K(static_cast<Eigen::Index>(i), j) = kernel_eval(spec, xi, row_span(Y, j));
  });
  return GramMatrix(std::move(K));
}

/// Returns (K(x1, x2), K(x1 + z, x2 + z)).
inline std::pair<double, double> shift_invariance_check(const KernelSpec& spec,
                                                        std::span<const double> x1,
                                                        std::span<const double> x2,
                                                        std::span<const double> z) {
  if (!is_shift_invariant(spec.family()))
    throw Error("shift_invariance_check: the linear kernel is not shift-invariant");
  if (z.size() != x1.size() || x2.size() != x1.size())
    throw Error("shift_invariance_check: dimension mismatch");
  std::vector<double> s1(x1.begin(), x1.end()), s2(x2.begin(), x2.end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    s1[i] += z[i];
    s2[i] += z[i];
  }
  return {kernel_eval(spec, x1, x2), kernel_eval(spec, s1, s2)};
}

}  // namespace rffsvm

#endif  // RFFSVM_KERNELS_HPP
