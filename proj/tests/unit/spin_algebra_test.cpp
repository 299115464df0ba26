#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "loschmidt/spin_algebra.hpp"
#include "loschmidt/units.hpp"

namespace loschmidt {
namespace {

constexpr double kPi = units::kPi;

// Integer binomial by the multiplicative formula, exact for these sizes.
std::uint64_t exact_binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

TEST(SpinLength, RejectsZeroAndOversize) {
  EXPECT_THROW(SpinLength(0), Error);
  EXPECT_THROW(SpinLength(256), Error);
  EXPECT_EQ(SpinLength(9).dim(), 10);
  EXPECT_EQ(SpinLength(3).to_string(), "3/2");
  EXPECT_EQ(SpinLength(2).to_string(), "1");
}

TEST(SpinLength, BasisOrderingRunsFromTopToBottom) {
  const SpinLength s(3);
  EXPECT_DOUBLE_EQ(s.m(0), 1.5);
  EXPECT_DOUBLE_EQ(s.m(3), -1.5);
  EXPECT_EQ(s.index_of(-1), 2);
  EXPECT_THROW(s.index_of(0), Error);  // parity mismatch
  EXPECT_THROW(s.index_of(5), Error);
}

TEST(SpinMatrices, SpinHalfIsDefiningRepresentation) {
  const auto ops = spin_matrices(SpinLength(1));
  EXPECT_DOUBLE_EQ(ops.iz(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(ops.iz(1, 1), -0.5);
  EXPECT_DOUBLE_EQ(ops.iplus(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(ops.iplus(1, 0), 0.0);
}

TEST(SpinMatrices, SpinOneLadderElements) {
  const auto ops = spin_matrices(SpinLength(2));
  EXPECT_DOUBLE_EQ(ops.iz(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ops.iz(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(ops.iz(2, 2), -1.0);
  EXPECT_NEAR(ops.iplus(0, 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ops.iplus(1, 2), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(ops.iplus(0, 2), 0.0);
}

TEST(SpinMatrices, CommutatorsCloseForAllSpinsUpToNineHalves) {
  for (int two_i = 1; two_i <= 9; ++two_i) {
    const auto ops = spin_matrices(SpinLength(two_i));
    const Eigen::MatrixXd zp = ops.iz * ops.iplus - ops.iplus * ops.iz;
    const Eigen::MatrixXd zm = ops.iz * ops.iminus - ops.iminus * ops.iz;
    const Eigen::MatrixXd pm = ops.iplus * ops.iminus - ops.iminus * ops.iplus;
    EXPECT_LT((zp - ops.iplus).cwiseAbs().maxCoeff(), 1e-12) << two_i;
    EXPECT_LT((zm + ops.iminus).cwiseAbs().maxCoeff(), 1e-12) << two_i;
    EXPECT_LT((pm - 2.0 * ops.iz).cwiseAbs().maxCoeff(), 1e-12) << two_i;
    EXPECT_EQ(ops.iplus.transpose(), ops.iminus);
  }
}

TEST(Binomial, MatchesIntegerBinomialsUpToNine) {
  for (int n = 1; n <= 9; ++n)
    for (int k = 0; k <= n; ++k)
      EXPECT_NEAR(binomial(n, k), static_cast<double>(exact_binomial(n, k)),
                  1e-12 * static_cast<double>(exact_binomial(n, k)));
}

TEST(CoherentState, PolesAndEquator) {
  for (int two_i = 1; two_i <= 9; ++two_i) {
    const SpinLength s(two_i);
    const auto north = coherent_state(s, 0.0, 1.234);
    EXPECT_NEAR(std::abs(north.amplitudes(0)), 1.0, 1e-15);
    EXPECT_NEAR(north.amplitudes.tail(s.dim() - 1).norm(), 0.0, 1e-15);
    const auto south = coherent_state(s, kPi, 0.0);
    EXPECT_NEAR(std::abs(south.amplitudes(s.dim() - 1)), 1.0, 1e-15);
    EXPECT_NEAR(south.amplitudes.head(s.dim() - 1).norm(), 0.0, 1e-15);
  }
  const auto eq = coherent_state(SpinLength(1), kPi / 2, 0.0);
  EXPECT_NEAR(eq.amplitudes(0).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(eq.amplitudes(1).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(eq.amplitudes(1).imag(), 0.0, 1e-15);
}

TEST(CoherentState, PhaseFollowsDistanceFromTop) {
  const SpinLength s(3);
  const double phi = 0.77;
  const auto st = coherent_state(s, 1.1, phi);
  for (int k = 0; k < s.dim(); ++k) {
    if (std::abs(st.amplitudes(k)) == 0.0) continue;
    EXPECT_NEAR(std::remainder(std::arg(st.amplitudes(k)) + k * phi, 2 * kPi), 0.0, 1e-13);
  }
}

TEST(CoherentState, RejectsNonFiniteAngles) {
  EXPECT_THROW(coherent_state(SpinLength(1), std::nan(""), 0.0), Error);
  EXPECT_THROW(coherent_state(SpinLength(1), 0.1, INFINITY), Error);
}

TEST(CoherentState, UnitNormForRandomAngles) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(0.0, kPi);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  for (int trial = 0; trial < 1000; ++trial) {
    const SpinLength s(1 + trial % 9);
    EXPECT_NEAR(coherent_state(s, th(rng), ph(rng)).amplitudes.norm(), 1.0, 1e-12);
  }
}

TEST(Weight, SymmetricSpinHalf) {
  EXPECT_NEAR(weight(SpinLength(1), 1, kPi / 2), 0.5, 1e-15);
  EXPECT_NEAR(weight(SpinLength(1), -1, kPi / 2), 0.5, 1e-15);
}

TEST(Weight, RejectsLevelsOutsideRange) {
  EXPECT_THROW(weight(SpinLength(3), 5, 0.3), Error);
  EXPECT_THROW(weight(SpinLength(3), 2, 0.3), Error);
}

TEST(Weight, NormalizedForRandomAngles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, kPi);
  for (int two_i = 1; two_i <= 9; ++two_i) {
    for (int trial = 0; trial < 50; ++trial) {
      EXPECT_NEAR(weights(SpinLength(two_i), th(rng)).sum(), 1.0, 1e-12);
    }
  }
}

TEST(Weight, EqualsCoherentStateProbabilitySpinThreeHalves) {
  const SpinLength s(3);
  const auto st = coherent_state(s, 0.7, 2.1);
  for (int k = 0; k < s.dim(); ++k)
    EXPECT_NEAR(weight(s, s.two_m(k), 0.7), std::norm(st.amplitudes(k)), 1e-12);
}

TEST(Weight, EqualsCoherentStateProbabilityOnGridAndIgnoresPhi) {
  for (int two_i = 1; two_i <= 9; ++two_i) {
    const SpinLength s(two_i);
    for (int g = 0; g < 50; ++g) {
      const double theta = kPi * g / 49.0;
      const auto a = coherent_state(s, theta, 0.0);
      const auto b = coherent_state(s, theta, 4.0);
      for (int k = 0; k < s.dim(); ++k) {
        const double w = weight(s, s.two_m(k), theta);
        EXPECT_NEAR(w, std::norm(a.amplitudes(k)), 1e-12);
        EXPECT_NEAR(w, std::norm(b.amplitudes(k)), 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace loschmidt
