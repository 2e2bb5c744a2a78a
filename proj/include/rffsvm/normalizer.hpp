#ifndef RFFSVM_NORMALIZER_HPP
#define RFFSVM_NORMALIZER_HPP

#include "rffsvm/core.hpp"

#include <string>

namespace rffsvm {

/// Per-column z-score statistics fitted on a training split.
///
/// Population standard deviation. Columns with zero spread are flagged and
/// only mean-centred when applied.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(Vector mean, Vector stddev) : mean_(std::move(mean)), std_(std::move(stddev)) {
    if (mean_.size() != std_.size()) throw Error("normalizer mean/std length mismatch");
    if ((std_.array() < 0.0).any()) throw Error("normalizer std must be >= 0");
  }

  static Normalizer fit(const Matrix& X_train) {
    if (X_train.rows() < 2)
      throw Error("normalizer needs at least 2 training rows, got " + std::to_string(X_train.rows()));
    if (!all_finite(X_train)) throw Error("normalizer: non-finite training value");
    const double n = static_cast<double>(X_train.rows());
    Vector mean = X_train.colwise().sum().transpose() / n;
    Vector sd(X_train.cols());
    for (Eigen::Index j = 0; j < X_train.cols(); ++j)
      sd[j] = std::sqrt((X_train.col(j).array() - mean[j]).square().sum() / n);
    return Normalizer(std::move(mean), std::move(sd));
  }

  Matrix apply(const Matrix& X) const {
    if (X.cols() != mean_.size())
      throw Error("normalizer fitted on " + std::to_string(mean_.size()) + " columns, input has " +
                  std::to_string(X.cols()));
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double centred = X(i, j) - mean_[j];
        out(i, j) = std_[j] > 0.0 ? centred / std_[j] : centred;
      }
    return out;
  }

  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return std_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  bool degenerate(std::size_t j) const { return std_[static_cast<Eigen::Index>(j)] == 0.0; }
  std::size_t degenerate_count() const { return static_cast<std::size_t>((std_.array() == 0.0).count()); }

  bool operator==(const Normalizer& o) const { return mean_ == o.mean_ && std_ == o.std_; }

 private:
  Vector mean_;
  Vector std_;
};

inline Normalizer fit_normalizer(const Matrix& X_train) { return Normalizer::fit(X_train); }

inline Matrix apply_normalizer(const Normalizer& norm, const Matrix& X) { return norm.apply(X); }

}  // namespace rffsvm

#endif  // RFFSVM_NORMALIZER_HPP
