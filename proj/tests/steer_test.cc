#include "qcl/steer.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace qcl {
namespace {

QuantumSystem PauliSystem() {
  return QuantumSystem::Create(testing::RealPauliZ(), testing::RealPauliX());
}

UnitaryMatrix Swap() {
  Block2 d;
  d << 0.0, 1.0, 1.0, 0.0;
  return UnitaryMatrix(Embed2x2(d, 1, 2, 2));
}

TEST(TargetFidelityGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const QuantumSystem sys = QuantumSystem::Create(testing::RandomSymmetric(3, rng),
                                                  testing::RandomTracelessSymmetric(3, rng));
  std::vector<double> values(25);
  for (double& v : values) v = u(rng);
  const ControlField field(4.0, values);
  const CMatrix target = PropagateFinal(sys, ControlField::Constant(4.0, 5, 0.4)).matrix();
  const FidelityAndGradient fg = TargetFidelityGradient(sys, field, target);
  const double h = 1e-5;
  auto phi = [&](const std::vector<double>& v) {
    const double f = std::abs((target.adjoint() * PropagateFinal(sys, ControlField(4.0, v)).matrix())
                                  .trace()) / 3.0;
    return f * f;
  };
  double worst = 0.0;
  for (size_t m = 0; m < values.size(); ++m) {
    auto plus = values;
    auto minus = values;
    plus[m] += h;
    minus[m] -= h;
    worst = std::max(worst, std::abs((phi(plus) - phi(minus)) / (2 * h) -
                                     fg.gradient(static_cast<Eigen::Index>(m))));
  }
  EXPECT_LT(worst / fg.gradient.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SynthesizeToTarget, FreeEvolutionTargetConvergesImmediately) {
  const QuantumSystem sys = PauliSystem();
  const Complex minus_i(0.0, -1.0);
  const UnitaryMatrix target(testing::TaylorExp(minus_i * 3.0 * sys.h0_complex()), 1e-10);
  SteerOptions opts;
  opts.segment_T = 3.0;
  opts.steps_per_segment = 30;
  const SynthesisResult r =
      SynthesizeToTarget(sys, target, opts, ControlField::Constant(3.0, 30, 0.0));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_NEAR(r.achieved_fidelity, 1.0, 1e-12);
}

TEST(SynthesizeToTarget, TwoLevelSwap) {
  SteerOptions opts;
  opts.segment_T = 5.0;
  opts.steps_per_segment = 50;
  opts.seed = 3;
  const SynthesisResult r = SynthesizeToTarget(PauliSystem(), Swap(), opts);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.achieved_fidelity, 0.999);
  for (size_t k = 1; k < r.history.size(); ++k) {
    EXPECT_GE(r.history[k], r.history[k - 1]);
  }
  EXPECT_NEAR(PhaseInvariantFidelity(Swap().matrix(), PropagateFinal(PauliSystem(), r.field).matrix()),
              r.achieved_fidelity, 1e-12);
}

TEST(SynthesizeToTarget, UncontrollableSystemThrows) {
  const QuantumSystem sys =
      QuantumSystem::Create(RealMatrix::Identity(2, 2), testing::RealPauliZ());
  EXPECT_THROW(SynthesizeToTarget(sys, Swap(), SteerOptions{}), NotControllableError);
}

TEST(SynthesizeToTarget, GlobalPhaseOfTargetDoesNotMatter) {
  SteerOptions opts;
  opts.segment_T = 5.0;
  opts.steps_per_segment = 40;
  opts.max_iters = 30;
  const UnitaryMatrix rotated(std::polar(1.0, 0.9) * Swap().matrix());
  const SynthesisResult a = SynthesizeToTarget(PauliSystem(), Swap(), opts);
  const SynthesisResult b = SynthesizeToTarget(PauliSystem(), rotated, opts);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (size_t k = 0; k < a.history.size(); ++k) {
    EXPECT_NEAR(a.history[k], b.history[k], 1e-10);
  }
  for (int m = 0; m < a.field.steps(); ++m) {
    EXPECT_NEAR(a.field.value(m), b.field.value(m), 1e-8);
  }
}

TEST(SynthesizeToTarget, DeterministicGivenSeed) {
  SteerOptions opts;
  opts.segment_T = 5.0;
  opts.steps_per_segment = 40;
  opts.max_iters = 40;
  opts.seed = 77;
  const SynthesisResult a = SynthesizeToTarget(PauliSystem(), Swap(), opts);
  const SynthesisResult b = SynthesizeToTarget(PauliSystem(), Swap(), opts);
  EXPECT_EQ(a.field.values(), b.field.values());
}

TEST(SynthesizeThroughWaypoints, IdentitySet) {
  SteerOptions opts;
  opts.segment_T = 4.0;
  opts.steps_per_segment = 40;
  const WaypointSet set(Provenance::kCustom, {UnitaryMatrix::Identity(2)});
  const WaypointSynthesis r = SynthesizeThroughWaypoints(PauliSystem(), set, opts);
  EXPECT_TRUE(r.all_visited);
  EXPECT_EQ(r.field.steps(), 40);
}

TEST(SynthesizeThroughWaypoints, DipoleAdaptedSetForPauliSystem) {
  const QuantumSystem sys = PauliSystem();
  const WaypointSet set = DipoleWaypoints(sys.mu_zt());
  SteerOptions opts;
  const WaypointSynthesis r = SynthesizeThroughWaypoints(sys, set, opts);
  ASSERT_EQ(r.visits.size(), 4u);
  for (const WaypointVisit& v : r.visits) EXPECT_GE(v.fidelity, 0.999);
  EXPECT_TRUE(r.all_visited);
  EXPECT_TRUE(r.span.full);

  // Re-propagating the concatenated field reproduces the segment endpoints.
  CMatrix composed = CMatrix::Identity(2, 2);
  int node = 0;
  for (const SynthesisResult& seg : r.segments) {
    composed = PropagateFinal(sys, seg.field).matrix() * composed;
    node += seg.field.steps();
    EXPECT_LT((r.trajectory.unitaries()[static_cast<size_t>(node)].matrix() - composed).norm(),
              1e-9);
  }
}

TEST(SynthesizeThroughWaypoints, UniversalSetForPauliSystem) {
  const QuantumSystem sys = PauliSystem();
  const WaypointSynthesis r =
      SynthesizeThroughWaypoints(sys, UniversalWaypoints(2, DefaultAngleGrid()), SteerOptions{});
  EXPECT_EQ(r.visits.size(), 10u);
  EXPECT_TRUE(r.all_visited);
  EXPECT_TRUE(r.span.full);
}

}  // namespace
}  // namespace qcl
