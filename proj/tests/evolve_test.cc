#include "qcl/evolve.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"

namespace qcl {
namespace {

using std::numbers::pi;

QuantumSystem RandomSystem(int n, std::mt19937_64& rng) {
  return QuantumSystem::Create(testing::RandomSymmetric(n, rng),
                               testing::RandomTracelessSymmetric(n, rng));
}

ControlField RandomField(double horizon, int steps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(static_cast<size_t>(steps));
  for (double& x : v) x = u(rng);
  return ControlField(horizon, v);
}

TEST(ControlField, Validation) {
  EXPECT_THROW(ControlField(0.0, {1.0}), std::invalid_argument);
  EXPECT_THROW(ControlField(1.0, {}), std::invalid_argument);
  EXPECT_THROW(ControlField(1.0, {NAN}), std::invalid_argument);
  const ControlField f(2.0, {1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(f.dt(), 0.5);
  EXPECT_DOUBLE_EQ(f.time(4), 2.0);
}

TEST(Propagate, FreeEvolutionMatchesExponential) {
  std::mt19937_64 rng(1);
  const Complex minus_i(0.0, -1.0);
  for (int n = 2; n <= 4; ++n) {
    const QuantumSystem sys = RandomSystem(n, rng);
    const double horizon = 3.7;
    const PropagatorTrajectory traj =
        Propagate(sys, ControlField::Constant(horizon, 50, 0.0));
    const CMatrix expected = testing::TaylorExp(minus_i * horizon * sys.h0_complex());
    EXPECT_LT((traj.final().matrix() - expected).norm(), 1e-10);
    EXPECT_EQ(traj.unitaries().front().matrix(), CMatrix::Identity(n, n));
  }
}

TEST(Propagate, ConstantDriveGivesPauliX) {
  // h0 = 0, mu = σx, ε = π/(2T): U(T) = exp(iπσx/2) = iσx.
  const QuantumSystem sys =
      QuantumSystem::Create(RealMatrix::Zero(2, 2), testing::RealPauliX());
  const double horizon = 1.3;
  const UnitaryMatrix u =
      PropagateFinal(sys, ControlField::Constant(horizon, 7, pi / (2 * horizon)));
  const Complex I(0.0, 1.0);
  EXPECT_LT((u.matrix() - I * testing::PauliX()).norm(), 1e-14);
  const Complex overlap = (testing::PauliX().adjoint() * (-I) * u.matrix()).trace();
  EXPECT_NEAR(std::abs(overlap) / 2.0, 1.0, 1e-14);
}

TEST(Propagate, UnitarityOverLongTrajectories) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 5; ++n) {
    const QuantumSystem sys = RandomSystem(n, rng);
    const PropagatorTrajectory traj = Propagate(sys, RandomField(20.0, 1000, rng));
    ASSERT_EQ(traj.size(), 1001);
    for (const UnitaryMatrix& u : traj.unitaries()) {
      EXPECT_LT(UnitarityDefect(u.matrix()), 1e-10);
    }
    for (const HermitianZT& d : traj.dipoles()) {
      EXPECT_LT((d.matrix() - d.matrix().adjoint()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT(std::abs(d.matrix().trace()), 1e-10);
    }
  }
}

TEST(Propagate, GroupPropertyUnderSplitting) {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 4; ++n) {
    const QuantumSystem sys = RandomSystem(n, rng);
    const ControlField whole = RandomField(6.0, 40, rng);
    const std::vector<double>& v = whole.values();
    const ControlField first(3.0, {v.begin(), v.begin() + 20});
    const ControlField second(3.0, {v.begin() + 20, v.end()});
    const CMatrix composed =
        PropagateFinal(sys, second).matrix() * PropagateFinal(sys, first).matrix();
    EXPECT_LT((PropagateFinal(sys, whole).matrix() - composed).norm(), 1e-9);
    const ControlField joined = ControlField::Concatenate({first, second});
    EXPECT_EQ(joined.values(), whole.values());
  }
}

TEST(Propagate, TimeReversalRecoversIdentity) {
  std::mt19937_64 rng(5);
  const QuantumSystem sys = RandomSystem(3, rng);
  const QuantumSystem reversed_sys = QuantumSystem::Create(-sys.h0(), -sys.mu());
  const ControlField field = RandomField(4.0, 60, rng);
  std::vector<double> back(field.values().rbegin(), field.values().rend());
  const CMatrix round_trip =
      PropagateFinal(reversed_sys, ControlField(4.0, back)).matrix() *
      PropagateFinal(sys, field).matrix();
  EXPECT_LT((round_trip - CMatrix::Identity(3, 3)).norm(), 1e-8);
}

TEST(Propagate, ConjugatedDipoleKeepsSpectrum) {
  std::mt19937_64 rng(6);
  const QuantumSystem sys = RandomSystem(4, rng);
  const PropagatorTrajectory traj = Propagate(sys, RandomField(5.0, 30, rng));
  Eigen::SelfAdjointEigenSolver<RealMatrix> ref(sys.mu(), Eigen::EigenvaluesOnly);
  for (const HermitianZT& d : traj.dipoles()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(d.matrix(), Eigen::EigenvaluesOnly);
    EXPECT_LT((es.eigenvalues() - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(StepAndDerivative, MatchesFiniteDifferenceOfTaylorExponential) {
  std::mt19937_64 rng(8);
  const Complex minus_i(0.0, -1.0);
  for (int n = 2; n <= 4; ++n) {
    const QuantumSystem sys = RandomSystem(n, rng);
    const double dt = 0.7;
    const double eps = 0.3;
    const double h = 1e-5;
    auto exact = [&](double e) {
      return testing::TaylorExp(minus_i * dt * (sys.h0() - e * sys.mu()).cast<Complex>());
    };
    const CMatrix fd = (exact(eps + h) - exact(eps - h)) / (2 * h);
    const StepWithDerivative s = StepAndDerivative(sys, eps, dt);
    EXPECT_LT((s.propagator - exact(eps)).norm(), 1e-12);
    EXPECT_LT((s.derivative - fd).norm(), 1e-8);
  }
}

TEST(StepAndDerivative, DegenerateSpectrum) {
  // H = 0 at ε = 0 with h0 = 0: derivative is i dt μ exactly.
  const QuantumSystem sys =
      QuantumSystem::Create(RealMatrix::Zero(2, 2), testing::RealPauliX());
  const StepWithDerivative s = StepAndDerivative(sys, 0.0, 0.25);
  const Complex I(0.0, 1.0);
  EXPECT_LT((s.derivative - I * 0.25 * testing::PauliX()).norm(), 1e-15);
}

TEST(ConjugatedDipole, IdentitySwapAndNorm) {
  const HermitianZT z(testing::PauliZ());
  EXPECT_TRUE(ConjugatedDipole(UnitaryMatrix::Identity(2), z).matrix().isApprox(z.matrix()));
  Block2 swap;
  swap << 0.0, 1.0, 1.0, 0.0;
  const HermitianZT flipped = ConjugatedDipole(UnitaryMatrix(Embed2x2(swap, 1, 2, 2)), z);
  EXPECT_LT((flipped.matrix() + testing::PauliZ()).norm(), 1e-15);

  std::mt19937_64 rng(12);
  const QuantumSystem sys = RandomSystem(3, rng);
  const HermitianZT mu = sys.mu_zt();
  const UnitaryMatrix u = PropagateFinal(sys, RandomField(2.0, 10, rng));
  EXPECT_NEAR(ConjugatedDipole(u, mu).norm(), mu.norm(), 1e-12);
  EXPECT_THROW(ConjugatedDipole(UnitaryMatrix::Identity(2), mu), std::invalid_argument);
}

TEST(EvolveDensity, MaximallyMixedIsFixed) {
  std::mt19937_64 rng(13);
  const QuantumSystem sys = RandomSystem(3, rng);
  const PropagatorTrajectory traj = Propagate(sys, RandomField(2.0, 20, rng));
  for (const DensityMatrix& rho : EvolveDensity(traj, DensityMatrix::MaximallyMixed(3))) {
    EXPECT_LT((rho.matrix() - CMatrix::Identity(3, 3) / 3.0).norm(), 1e-12);
  }
}

TEST(EvolveDensity, PurityAndSpectrumPreserved) {
  std::mt19937_64 rng(14);
  const QuantumSystem sys = RandomSystem(4, rng);
  const PropagatorTrajectory traj = Propagate(sys, RandomField(3.0, 25, rng));
  for (const DensityMatrix& rho : EvolveDensity(traj, DensityMatrix::Pure(4, 0))) {
    EXPECT_NEAR((rho.matrix() * rho.matrix()).trace().real(), 1.0, 1e-10);
  }
  const DensityMatrix rho0(testing::RandomDensity(4, rng));
  const auto rhos = EvolveDensity(traj, rho0);
  Eigen::SelfAdjointEigenSolver<CMatrix> e0(rho0.matrix(), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<CMatrix> e1(rhos.back().matrix(), Eigen::EigenvaluesOnly);
  EXPECT_LT((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(rhos.back().matrix().trace().real(), 1.0, 1e-10);
}

TEST(Expectation, KnownValuesAndBounds) {
  CMatrix obs = CMatrix::Zero(3, 3);
  obs.diagonal() << 2.0, -1.0, 0.5;
  EXPECT_NEAR(Expectation(DensityMatrix::MaximallyMixed(3), obs), 1.5 / 3.0, 1e-15);
  EXPECT_NEAR(Expectation(DensityMatrix::Pure(3, 0), obs), 2.0, 1e-15);

  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix o = testing::RandomSymmetric(3, rng).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(o, Eigen::EigenvaluesOnly);
    const double value = Expectation(DensityMatrix(testing::RandomDensity(3, rng)), o);
    EXPECT_GE(value, es.eigenvalues()(0) - 1e-12);
    EXPECT_LE(value, es.eigenvalues()(2) + 1e-12);
  }
  EXPECT_THROW(Expectation(DensityMatrix::Pure(2, 0), obs), std::invalid_argument);
}

TEST(DensityMatrix, Validation) {
  EXPECT_THROW(DensityMatrix(CMatrix::Identity(2, 2)), std::invalid_argument);
  CMatrix bad(2, 2);
  bad << 1.5, 0.0, 0.0, -0.5;
  EXPECT_THROW(DensityMatrix{bad}, std::invalid_argument);
}

TEST(FieldDocument, RoundTripAndErrors) {
  std::mt19937_64 rng(16);
  const ControlField field = RandomField(2.5, 9, rng);
  std::stringstream s;
  SaveField(s, field);
  const ControlField back = LoadField(s);
  EXPECT_EQ(back.values(), field.values());
  EXPECT_EQ(back.horizon(), field.horizon());

  std::istringstream bad_m(R"({"T": 1, "M": 3, "values": [1, 2]})");
  EXPECT_THROW(LoadField(bad_m), ParseError);
  std::istringstream bad_t(R"({"T": -1, "values": [1, 2]})");
  EXPECT_THROW(LoadField(bad_t), ParseError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const QuantumSystem sys =
      QuantumSystem::Create(testing::RealPauliZ(), testing::RealPauliX());
  std::ostringstream out;
  WriteTrajectoryCsv(out, Propagate(sys, ControlField::Constant(1.0, 3, 0.0)));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,re_U1_1,im_U1_1,re_U1_2,im_U1_2,re_U2_1,im_U2_1,re_U2_2,im_U2_2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

}  // namespace
}  // namespace qcl
