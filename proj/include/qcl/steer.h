#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcl/evolve.h"
#include "qcl/landscape.h"
#include "qcl/model.h"
#include "qcl/waypoints.h"

namespace qcl {

struct SteerOptions {
  double segment_T = 0.0;  ///< <= 0 selects DefaultSegmentHorizon(sys)
  int steps_per_segment = 100;
  int max_iters = 2000;
  double fid_target = 0.9995;
  double step_size = 0.1;  ///< initial line-search step
  std::uint64_t seed = 1;
  double init_amplitude = 0.1;  ///< initial guess uniform in [-a, a]
};

/// 10 pi N / |mu|_HS.
double DefaultSegmentHorizon(const QuantumSystem& sys);

struct SynthesisResult {
  ControlField field;
  double achieved_fidelity = 0.0;  ///< |Tr(target* U_M)| / N
  int iterations = 0;
  bool converged = false;
  /// Fidelity after each accepted iteration, starting with the initial guess.
  std::vector<double> history;
};

/// Gate fidelity |Tr(target* U(T))| / N of a field, and its gradient with
/// respect to the step amplitudes (exact step derivatives).
struct FidelityAndGradient {
  double fidelity = 0.0;
  RealVector gradient;  ///< of Φ = fidelity^2
};

FidelityAndGradient TargetFidelityGradient(const QuantumSystem& sys,
                                           const ControlField& field,
                                           const CMatrix& target);

/// Gradient ascent on Φ(ε) = |Tr(target* U(T))|^2 / N^2 with backtracking
/// (halving, Armijo constant 1e-4). After an accepted step the next trial
/// step doubles, so Φ never decreases between accepted iterates.
///
/// Throws NotControllableError for systems without full Lie rank. When
/// `initial` is given it replaces the seeded random guess.
SynthesisResult SynthesizeToTarget(const QuantumSystem& sys,
                                   const UnitaryMatrix& target,
                                   const SteerOptions& opts,
                                   const std::optional<ControlField>& initial =
                                       std::nullopt);

struct WaypointSynthesis {
  ControlField field;
  std::vector<SynthesisResult> segments;
  PropagatorTrajectory trajectory;
  std::vector<WaypointVisit> visits;
  SpanReport span;
  bool all_visited = false;
};

/// Chains one synthesized segment per way-point. Segment k targets
/// W_k U(t_{k-1}, 0)*, the relative propagator from the endpoint actually
/// reached by the previous segments, so that U(t_k, 0) matches W_k to the
/// segment's fidelity. The concatenated field is re-propagated and checked
/// with WaypointVisits (tolerance 1 - fid_target) and TrajectoryIndependence.
WaypointSynthesis SynthesizeThroughWaypoints(const QuantumSystem& sys,
                                             const WaypointSet& set,
                                             const SteerOptions& opts);

}  // namespace qcl
