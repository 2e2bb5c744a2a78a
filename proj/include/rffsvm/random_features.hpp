#ifndef RFFSVM_RANDOM_FEATURES_HPP
#define RFFSVM_RANDOM_FEATURES_HPP

#include "rffsvm/core.hpp"
#include "rffsvm/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <utility>

namespace rffsvm {

/**
 * Reproducible uniform stream.
 *
 * std::mt19937_64 has a fully specified output sequence, and the conversion
 * to doubles below is done by hand (the standard distributions are
 * implementation-defined), so a given seed yields the same draws on every
 * conforming platform.
 */
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double half_open01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; consumes two uniforms per draw.
  double standard_normal() {
    const double u1 = open01();
    const double u2 = open01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline double draw_spectral(const KernelSpec& spec, UniformStream& rng) {
  const double gamma = spec.gamma();
  switch (spec.family()) {
    case KernelFamily::gaussian:
      // Fourier transform of exp(-gamma d^2) is a normal with variance 2 gamma.
      return std::sqrt(2.0 * gamma) * rng.standard_normal();
    case KernelFamily::laplacian: {
      const double u = rng.open01();
      return gamma * std::tan(std::numbers::pi * (u - 0.5));
    }
    case KernelFamily::cauchy: {
      const double c = rng.open01() - 0.5;
      const double sign = c < 0.0 ? -1.0 : (c > 0.0 ? 1.0 : 0.0);
      return -gamma * sign * std::log(1.0 - 2.0 * std::abs(c));
    }
    case KernelFamily::linear: break;
  }
  throw Error("linear kernel needs no random features");
}

}  // namespace detail

/// i.i.d. draws from the spectral distribution of a shift-invariant kernel:
/// normal(0, var 2g) for gaussian, Cauchy(0, g) for laplacian, Laplace(0, g)
/// for cauchy.
inline std::vector<double> sample_spectral(const KernelSpec& spec, std::size_t count,
                                           UniformStream& rng) {
  if (!is_shift_invariant(spec.family())) throw Error("linear kernel needs no random features");
  if (count == 0) throw Error("sample_spectral: count must be >= 1");
  std::vector<double> out(count);
  for (auto& w : out) w = detail::draw_spectral(spec, rng);
  return out;
}

/// Serializable identity of a feature map; W and b are regenerated from it.
struct MapDescriptor {
  static constexpr int kVersion = 1;
  int version = kVersion;
  KernelSpec spec = KernelSpec::linear();
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::uint64_t seed = 0;

  bool operator==(const MapDescriptor&) const = default;
};

/// Phi(x) = sqrt(2/M) cos(W x + b).
class RandomFeatureMap {
 public:
  RandomFeatureMap(MapDescriptor desc, Matrix W, Vector b)
      : desc_(desc), W_(std::move(W)), b_(std::move(b)) {}

  const MapDescriptor& descriptor() const { return desc_; }
  const KernelSpec& spec() const { return desc_.spec; }
  std::size_t input_dim() const { return desc_.input_dim; }
  std::size_t target_dim() const { return desc_.target_dim; }
  std::uint64_t seed() const { return desc_.seed; }
  /// M x N frequencies.
  const Matrix& frequencies() const { return W_; }
  /// M phases in [0, 2 pi).
  const Vector& phases() const { return b_; }

 private:
  MapDescriptor desc_;
  Matrix W_;
  Vector b_;
};

/// Builds the map. The stream is consumed for all of W (row-major) first,
/// then for b; model files rely on this order.
inline RandomFeatureMap build_map(const KernelSpec& spec, std::size_t input_dim,
                                  std::size_t target_dim, std::uint64_t seed) {
  if (!is_shift_invariant(spec.family())) throw Error("linear kernel needs no random features");
  if (input_dim == 0) throw Error("build_map: input dimension must be >= 1");
  if (target_dim == 0) throw Error("build_map: target dimension M must be >= 1");

  UniformStream rng(seed);
  Matrix W(static_cast<Eigen::Index>(target_dim), static_cast<Eigen::Index>(input_dim));
  double* w = W.data();
  for (Eigen::Index i = 0; i < W.size(); ++i) w[i] = detail::draw_spectral(spec, rng);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double below_two_pi = std::nextafter(two_pi, 0.0);
  Vector b(static_cast<Eigen::Index>(target_dim));
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = std::min(two_pi * rng.half_open01(), below_two_pi);

  return RandomFeatureMap(MapDescriptor{MapDescriptor::kVersion, spec, input_dim, target_dim, seed},
                          std::move(W), std::move(b));
}

inline RandomFeatureMap build_map(const MapDescriptor& desc) {
  if (desc.version != MapDescriptor::kVersion)
    throw Error("unsupported feature-map version " + std::to_string(desc.version));
  return build_map(desc.spec, desc.input_dim, desc.target_dim, desc.seed);
}

namespace detail {
// Rows are pushed through the product in fixed-size, zero-padded blocks so
// that a row's output never depends on the batch it arrived in or on the
// number of worker threads.
inline constexpr Eigen::Index kTransformBlock = 64;
}  // namespace detail

/// Applies the map to every row of X; returns n x M.
inline Matrix transform(const RandomFeatureMap& map, const Matrix& X, unsigned threads = 1) {
  if (static_cast<std::size_t>(X.cols()) != map.input_dim())
    throw Error("transform: input has " + std::to_string(X.cols()) + " columns, map expects " +
                std::to_string(map.input_dim()));
  if (!all_finite(X)) throw Error("transform: non-finite input");

  const Eigen::Index n = X.rows();
  const Eigen::Index M = static_cast<Eigen::Index>(map.target_dim());
  const Eigen::Index N = X.cols();
  constexpr Eigen::Index B = detail::kTransformBlock;
  const double scale = std::sqrt(2.0 / static_cast<double>(M));
  const auto Wt = map.frequencies().transpose();
  const Eigen::RowVectorXd b = map.phases().transpose();

  Matrix out(n, M);
  const std::size_t blocks = static_cast<std::size_t>((n + B - 1) / B);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * B;
    const Eigen::Index rows = std::min(B, n - r0);
    Matrix in = Matrix::Zero(B, N);
    in.topRows(rows) = X.middleRows(r0, rows);
    Matrix proj(B, M);
    proj.noalias() = in * Wt;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < M; ++j) out(r0 + i, j) = scale * std::cos(proj(i, j) + b[j]);
  });
  return out;
}

/// transform(X) transform(X)^T.
inline GramMatrix approx_gram(const RandomFeatureMap& map, const Matrix& X, unsigned threads = 1) {
  const Matrix Z = transform(map, X, threads);
  Matrix G = Z * Z.transpose();
  return GramMatrix(std::move(G));
}

/// Writes W (row-major) then b as little-endian float64.
inline void export_dense(const RandomFeatureMap& map, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "export_dense assumes little-endian");
  std::string bytes;
  bytes.append(reinterpret_cast<const char*>(map.frequencies().data()), map.frequencies().size() * sizeof(double));
  bytes.append(reinterpret_cast<const char*>(map.phases().data()), map.phases().size() * sizeof(double));
  write_file_atomic(path, bytes);
}

/// Independent input pairs with N(0, scale^2) entries, drawn from `seed`.
/// Probe pairs: anchors x ~ N(0, spread^2 I), partners y = x + r z with z ~ N(0, I / dim)
/// and r log-uniform on [min_offset, max_offset], so |y - x| is about r.
/// Wide anchors keep the phase term of the estimate from being shared across pairs;
/// the offset range gives every kernel values spread over (0, 1].
inline std::pair<Matrix, Matrix> random_pairs(std::size_t dim, std::size_t pairs, std::uint64_t seed,
                                              double spread = 5.0, double min_offset = 0.1,
                                              double max_offset = 30.0) {
  if (dim == 0 || pairs == 0) throw Error("random_pairs: dim and pairs must be >= 1");
  if (!(spread > 0.0) || !(min_offset > 0.0) || !(max_offset >= min_offset) || !std::isfinite(max_offset))
    throw Error("random_pairs: need spread > 0 and 0 < min_offset <= max_offset");
  UniformStream rng(seed);
  Matrix X(static_cast<Eigen::Index>(pairs), static_cast<Eigen::Index>(dim)), Y(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = spread * rng.standard_normal();
  const double lo = std::log(min_offset), hi = std::log(max_offset);
  const double unit = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double r = std::exp(lo + (hi - lo) * rng.open01());
    for (Eigen::Index j = 0; j < X.cols(); ++j) Y(i, j) = X(i, j) + r * unit * rng.standard_normal();
  }
  return {std::move(X), std::move(Y)};
}

struct ProbeRow {
  std::size_t target_dim = 0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  /// sqrt(M) * mean_abs_error; flat when the error decays as 1/sqrt(M).
  double scaled_error = 0.0;
};

/// |<phi(x_i), phi(y_i)> - K(x_i, y_i)| over the rows of X and Y, one map per M
/// (each built from `seed`).
inline std::vector<ProbeRow> probe_approximation(const KernelSpec& spec, const Matrix& X, const Matrix& Y,
                                                 std::span<const std::size_t> m_values, std::uint64_t seed,
                                                 unsigned threads = 1) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw Error("probe: X and Y must have the same shape");
  if (m_values.empty()) throw Error("probe: no M values");
  Vector exact(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) exact[i] = kernel_eval(spec, row_span(X, i), row_span(Y, i));
  std::vector<ProbeRow> rows;
  for (const auto M : m_values) {
    const auto map = build_map(spec, static_cast<std::size_t>(X.cols()), M, seed);
    const Matrix PX = transform(map, X, threads), PY = transform(map, Y, threads);
    ProbeRow r;
    r.target_dim = M;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double err = std::abs(PX.row(i).dot(PY.row(i)) - exact[i]);
      r.mean_abs_error += err;
      r.max_abs_error = std::max(r.max_abs_error, err);
    }
    r.mean_abs_error /= static_cast<double>(X.rows());
    r.scaled_error = std::sqrt(static_cast<double>(M)) * r.mean_abs_error;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rffsvm

#endif  // RFFSVM_RANDOM_FEATURES_HPP
