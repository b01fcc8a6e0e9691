#include "qcl/reachability.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace qcl {
namespace {

RealMatrix BlockDiagonal(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix m = RealMatrix::Zero(4, 4);
  m.topLeftCorner(2, 2) = a;
  m.bottomRightCorner(2, 2) = b;
  return m;
}

void ExpectOrthonormalSkewHermitian(const LieClosureResult& r) {
  const auto k = r.basis.size();
  for (size_t a = 0; a < k; ++a) {
    const CMatrix& x = r.basis[a];
    EXPECT_LT((x + x.adjoint()).norm(), 1e-10);
    for (size_t b = 0; b < k; ++b) {
      const double g = x.cwiseProduct(r.basis[b].conjugate()).sum().real();
      EXPECT_NEAR(g, a == b ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(LieClosure, PauliPairGeneratesSu2) {
  // [-iσz, -iσx] = -2iσy closes su(2).
  const LieClosureResult r = LieClosure(testing::RealPauliZ(), testing::RealPauliX());
  EXPECT_EQ(r.dimension, 3);
  EXPECT_EQ(r.verdict, Controllability::kSU);
  ExpectOrthonormalSkewHermitian(r);
}

TEST(LieClosure, SingleGenerator) {
  const LieClosureResult r = LieClosure(RealMatrix::Zero(2, 2), testing::RealPauliZ());
  EXPECT_EQ(r.dimension, 1);
  EXPECT_EQ(r.verdict, Controllability::kNo);
}

TEST(LieClosure, BlockDiagonalSystemIsConfined) {
  std::mt19937_64 rng(21);
  const RealMatrix h0 = BlockDiagonal(testing::RandomSymmetric(2, rng),
                                      testing::RandomSymmetric(2, rng));
  RealMatrix mu = BlockDiagonal(testing::RandomSymmetric(2, rng),
                                testing::RandomSymmetric(2, rng));
  mu.diagonal().array() -= mu.trace() / 4.0;
  const LieClosureResult r = LieClosure(h0, mu);
  EXPECT_LE(r.dimension, 8);
  EXPECT_LT(r.dimension, 15);
  EXPECT_EQ(r.verdict, Controllability::kNo);
  ExpectOrthonormalSkewHermitian(r);
}

TEST(IsControllable, FullyCoupledThreeLevel) {
  RealMatrix h0 = RealMatrix::Zero(3, 3);
  h0.diagonal() << 0.0, 1.0, 3.0;
  RealMatrix mu = RealMatrix::Ones(3, 3);
  mu.diagonal().setZero();
  const QuantumSystem sys = QuantumSystem::Create(h0, mu);
  EXPECT_NE(IsControllable(sys), Controllability::kNo);
  EXPECT_GE(LieClosure(h0, mu).dimension, 8);
}

TEST(IsControllable, CommutingGenerators) {
  const QuantumSystem sys = QuantumSystem::Create(
      2.5 * RealMatrix::Identity(2, 2), testing::RealPauliZ());
  EXPECT_EQ(IsControllable(sys), Controllability::kNo);
  const QuantumSystem pauli =
      QuantumSystem::Create(testing::RealPauliZ(), testing::RealPauliX());
  EXPECT_EQ(IsControllable(pauli), Controllability::kSU);
}

TEST(LieClosure, TracefulDriftGivesUn) {
  RealMatrix h0 = RealMatrix::Zero(2, 2);
  h0.diagonal() << 0.0, 1.0;
  const LieClosureResult r = LieClosure(h0, testing::RealPauliX());
  EXPECT_EQ(r.dimension, 4);
  EXPECT_EQ(r.verdict, Controllability::kU);
}

TEST(LieClosure, InvariantUnderSwapAndRescaling) {
  std::mt19937_64 rng(22);
  for (int n = 2; n <= 4; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      const RealMatrix h0 = testing::RandomSymmetric(n, rng);
      const RealMatrix mu = testing::RandomTracelessSymmetric(n, rng);
      const LieClosureResult base = LieClosure(h0, mu);
      EXPECT_EQ(LieClosure(mu, h0).dimension, base.dimension);
      EXPECT_EQ(LieClosure(1e3 * h0, 1e-3 * mu).dimension, base.dimension);
      EXPECT_EQ(LieClosure(-0.01 * h0, 7.0 * mu).verdict, base.verdict);
      ExpectOrthonormalSkewHermitian(base);
      EXPECT_LE(base.dimension, n * n);
    }
  }
  const RealMatrix z = testing::RealPauliZ();
  const RealMatrix x = testing::RealPauliX();
  EXPECT_EQ(LieClosure(1e-6 * z, 1e6 * x).verdict, Controllability::kSU);
}

}  // namespace
}  // namespace qcl
