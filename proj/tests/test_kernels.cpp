#include "rffsvm/kernels.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <vector>

using namespace rffsvm;

namespace {

const std::vector<KernelSpec>& all_specs() {
  static const std::vector<KernelSpec> specs{KernelSpec::linear(), KernelSpec(KernelFamily::gaussian, 0.3),
                                             KernelSpec(KernelFamily::laplacian, 0.2),
                                             KernelSpec(KernelFamily::cauchy, 0.7)};
  return specs;
}

std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

}  // namespace

TEST(KernelSpec, RejectsNonPositiveGamma) {
  EXPECT_THROW(KernelSpec(KernelFamily::gaussian, 0.0), Error);
  EXPECT_THROW(KernelSpec(KernelFamily::laplacian, -1.0), Error);
  EXPECT_THROW(KernelSpec(KernelFamily::cauchy, std::numeric_limits<double>::quiet_NaN()), Error);
  EXPECT_THROW(KernelSpec(KernelFamily::cauchy, std::numeric_limits<double>::infinity()), Error);
  EXPECT_NO_THROW(KernelSpec(KernelFamily::linear, 0.0));
  EXPECT_EQ(KernelSpec(KernelFamily::linear, 5.0).gamma(), 0.0);
}

TEST(KernelSpec, FamilyNamesRoundTrip) {
  for (auto f : {KernelFamily::linear, KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::cauchy})
    EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_EQ(family_name(KernelFamily::laplacian), "laplacian");
  EXPECT_THROW(parse_family("polynomial"), Error);
}

TEST(KernelEval, HandEvaluatedValues) {
  const std::vector<double> a{3.7, -1.2};
  EXPECT_EQ(kernel_eval(KernelSpec(KernelFamily::gaussian, 0.5), a, a), 1.0);

  const std::vector<double> zero{0.0, 0.0}, ones{1.0, 1.0}, mixed{1.0, -1.0};
  EXPECT_NEAR(kernel_eval(KernelSpec(KernelFamily::gaussian, 0.5), zero, ones), 0.36787944117144233, 1e-15);
  EXPECT_NEAR(kernel_eval(KernelSpec(KernelFamily::laplacian, 1.0), zero, mixed), 0.1353352832366127, 1e-15);
  EXPECT_NEAR(kernel_eval(KernelSpec(KernelFamily::cauchy, 1.0), zero, ones), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::linear(), ones, mixed), 0.0);
}

TEST(KernelEval, RejectsBadInput) {
  const std::vector<double> two{1.0, 2.0}, three{1.0, 2.0, 3.0}, bad{1.0, std::numeric_limits<double>::infinity()};
  const auto g = KernelSpec(KernelFamily::gaussian, 1.0);
  EXPECT_THROW(kernel_eval(g, two, three), Error);
  EXPECT_THROW(kernel_eval(g, two, bad), Error);
  EXPECT_THROW(kernel_eval(g, std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(KernelEval, CauchyAccurateInHighDimension) {
  const std::size_t n = 6553;
  const std::vector<double> x(n, 0.0), y(n, 0.1);
  const double k = kernel_eval(KernelSpec(KernelFamily::cauchy, 1.0), x, y);
  EXPECT_GT(k, 0.0);
  EXPECT_NEAR(std::log(k), -static_cast<double>(n) * std::log1p(0.01), 1e-9);
}

TEST(KernelProperties, SymmetryUnitDiagonalBoundedness) {
  std::mt19937_64 gen(11);
  for (const auto& spec : all_specs()) {
    for (int trial = 0; trial < 500; ++trial) {
      const auto x = random_vector(gen, 7, 2.0), y = random_vector(gen, 7, 2.0);
      EXPECT_EQ(kernel_eval(spec, x, y), kernel_eval(spec, y, x));
      if (is_shift_invariant(spec.family())) {
        EXPECT_LE(std::abs(kernel_eval(spec, x, x) - 1.0), 1e-12);
        const double k = kernel_eval(spec, x, y);
        EXPECT_GT(k, 0.0);
        EXPECT_LE(k, 1.0);
      }
    }
  }
}

TEST(KernelProperties, ShiftInvariance) {
  std::mt19937_64 gen(12);
  for (const auto& spec : all_specs()) {
    if (!is_shift_invariant(spec.family())) continue;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto x1 = random_vector(gen, 5), x2 = random_vector(gen, 5), z = random_vector(gen, 5, 3.0);
      const auto [k, shifted] = shift_invariance_check(spec, x1, x2, z);
      EXPECT_LE(std::abs(k - shifted), 1e-9);
    }
  }
}

TEST(ShiftInvarianceCheck, Examples) {
  const std::vector<double> a{1.0}, b{0.0}, z{5.0};
  auto [k1, k2] = shift_invariance_check(KernelSpec(KernelFamily::gaussian, 1.0), a, b, z);
  EXPECT_NEAR(k1, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k2, std::exp(-1.0), 1e-15);

  const std::vector<double> c{0.0, 0.0}, d{1.0, 0.0}, s{-3.0, 4.0};
  std::tie(k1, k2) = shift_invariance_check(KernelSpec(KernelFamily::cauchy, 2.0), c, d, s);
  EXPECT_NEAR(k1, 0.2, 1e-15);
  EXPECT_NEAR(k2, 0.2, 1e-15);

  EXPECT_THROW(shift_invariance_check(KernelSpec::linear(), a, b, z), Error);
}

TEST(KernelProperties, GramIsPositiveSemidefinite) {
  std::mt19937_64 gen(13);
  for (const auto& spec : all_specs()) {
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix X = oracle::gaussian_matrix(10, 6, 1.0, gen);
      const auto G = gram_matrix(spec, X, X);
      EXPECT_GE(oracle::min_eigenvalue(G.values()), -1e-8) << family_name(spec.family());
    }
  }
}

TEST(KernelProperties, StrictlyDecreasingInGamma) {
  const std::vector<double> x{0.3, -0.2, 1.1}, y{-0.4, 0.5, 0.9};
  for (auto f : {KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::cauchy}) {
    double prev = 1.0;
    for (double g = 0.01; g < 20.0; g *= 1.5) {
      const double k = kernel_eval(KernelSpec(f, g), x, y);
      EXPECT_LT(k, prev) << family_name(f) << " gamma=" << g;
      prev = k;
    }
  }
}

TEST(GramMatrix, MatchesLoopedEvaluationBitForBit) {
  std::mt19937_64 gen(14);
  const Matrix X = oracle::gaussian_matrix(9, 4, 1.0, gen);
  const Matrix Y = oracle::gaussian_matrix(5, 4, 1.0, gen);
  for (const auto& spec : all_specs()) {
    for (unsigned threads : {1u, 3u}) {
      const auto G = gram_matrix(spec, X, Y, threads);
      ASSERT_EQ(G.rows(), 9);
      ASSERT_EQ(G.cols(), 5);
      for (Eigen::Index i = 0; i < 9; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(G(i, j), kernel_eval(spec, row_span(X, i), row_span(Y, j)));
    }
    const auto S = gram_matrix(spec, X, X);
    EXPECT_LE((S.values() - S.values().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GramMatrix, Examples) {
  Matrix X(2, 2);
  X << 0, 0, 1, 1;
  const auto G = gram_matrix(KernelSpec(KernelFamily::gaussian, 0.5), X, X);
  EXPECT_EQ(G(0, 0), 1.0);
  EXPECT_EQ(G(1, 1), 1.0);
  EXPECT_NEAR(G(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(G(1, 0), std::exp(-1.0), 1e-15);

  Matrix one(1, 3);
  one << 0.5, -2.0, 7.0;
  for (const auto& spec : all_specs())
    if (is_shift_invariant(spec.family())) EXPECT_EQ(gram_matrix(spec, one, one)(0, 0), 1.0);

  Matrix E = Matrix::Identity(2, 2);
  const auto L = gram_matrix(KernelSpec::linear(), E, E);
  EXPECT_TRUE(L.values().isApprox(Matrix::Identity(2, 2)));

  Matrix wrong(2, 3);
  wrong.setZero();
  EXPECT_THROW(gram_matrix(KernelSpec::linear(), X, wrong), Error);
}
