#include "qcl/steer.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qcl/reachability.h"

namespace qcl {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;

void RequireControllable(const QuantumSystem& sys) {
  if (IsControllable(sys) == Controllability::kNo) {
    throw NotControllableError(
        "system is not controllable: the Lie algebra generated by -iH0 and "
        "-imu is neither su(N) nor u(N)");
  }
}

void ValidateOptions(const SteerOptions& opts) {
  if (!(opts.fid_target > 0.0 && opts.fid_target < 1.0)) {
    throw std::invalid_argument("SteerOptions: fid_target must lie in (0, 1)");
  }
  if (opts.steps_per_segment < 1 || opts.max_iters < 0 ||
      !(opts.step_size > 0.0) || opts.init_amplitude < 0.0) {
    throw std::invalid_argument("SteerOptions: step counts and sizes must be positive");
  }
}

double Horizon(const QuantumSystem& sys, const SteerOptions& opts) {
  return opts.segment_T > 0.0 ? opts.segment_T : DefaultSegmentHorizon(sys);
}

SynthesisResult Ascend(const QuantumSystem& sys, const CMatrix& target,
                       const SteerOptions& opts, ControlField field) {
  const double horizon = field.horizon();
  FidelityAndGradient current = TargetFidelityGradient(sys, field, target);
  SynthesisResult result{field, current.fidelity, 0, false, {current.fidelity}};

  double alpha = opts.step_size;
  while (result.iterations < opts.max_iters &&
         current.fidelity < opts.fid_target) {
    const double phi = current.fidelity * current.fidelity;
    const double slope = current.gradient.squaredNorm();
    if (slope == 0.0) break;
    bool accepted = false;
    while (alpha > kMinStep) {
      std::vector<double> trial = field.values();
      for (size_t m = 0; m < trial.size(); ++m) {
        trial[m] += alpha * current.gradient(static_cast<Eigen::Index>(m));
      }
      ControlField candidate(horizon, std::move(trial));
      FidelityAndGradient next = TargetFidelityGradient(sys, candidate, target);
      if (next.fidelity * next.fidelity >= phi + kArmijo * alpha * slope) {
        field = std::move(candidate);
        current = std::move(next);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    ++result.iterations;
    result.history.push_back(current.fidelity);
    alpha *= 2.0;
  }
  result.field = std::move(field);
  result.achieved_fidelity = current.fidelity;
  result.converged = current.fidelity >= opts.fid_target;
  return result;
}

}  // namespace

double DefaultSegmentHorizon(const QuantumSystem& sys) {
  const double norm = sys.mu().norm();
  if (norm == 0.0) throw std::invalid_argument("DefaultSegmentHorizon: mu = 0");
  return 10.0 * std::numbers::pi * sys.dim() / norm;
}

FidelityAndGradient TargetFidelityGradient(const QuantumSystem& sys,
                                           const ControlField& field,
                                           const CMatrix& target) {
  const int n = sys.dim();
  if (target.rows() != n || target.cols() != n) {
    throw std::invalid_argument("TargetFidelityGradient: dimension mismatch");
  }
  const int steps = field.steps();
  std::vector<StepWithDerivative> step;
  step.reserve(static_cast<size_t>(steps));
  std::vector<CMatrix> forward(static_cast<size_t>(steps + 1));
  forward[0] = CMatrix::Identity(n, n);
  for (int m = 0; m < steps; ++m) {
    step.push_back(StepAndDerivative(sys, field.value(m), field.dt()));
    forward[static_cast<size_t>(m + 1)] =
        step.back().propagator * forward[static_cast<size_t>(m)];
  }
  const CMatrix w_adj = target.adjoint();
  const Complex tau = (w_adj * forward.back()).trace();
  const double nn = static_cast<double>(n) * n;

  FidelityAndGradient out;
  out.fidelity = std::abs(tau) / n;
  out.gradient.resize(steps);
  // dτ/dε_m = Tr(dS_m · U_{m-1} W* B_m)
  CMatrix after = CMatrix::Identity(n, n);
  for (int m = steps - 1; m >= 0; --m) {
    const CMatrix a = forward[static_cast<size_t>(m)] * w_adj * after;
    const Complex dtau =
        step[static_cast<size_t>(m)].derivative.cwiseProduct(a.transpose()).sum();
    out.gradient(m) = 2.0 * (std::conj(tau) * dtau).real() / nn;
    after = after * step[static_cast<size_t>(m)].propagator;
  }
  return out;
}

SynthesisResult SynthesizeToTarget(const QuantumSystem& sys,
                                   const UnitaryMatrix& target,
                                   const SteerOptions& opts,
                                   const std::optional<ControlField>& initial) {
  ValidateOptions(opts);
  if (target.dim() != sys.dim()) {
    throw std::invalid_argument("SynthesizeToTarget: dimension mismatch");
  }
  RequireControllable(sys);
  if (initial) return Ascend(sys, target.matrix(), opts, *initial);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> noise(-opts.init_amplitude,
                                               opts.init_amplitude);
  std::vector<double> values(static_cast<size_t>(opts.steps_per_segment));
  for (double& v : values) v = noise(rng);
  return Ascend(sys, target.matrix(), opts,
                ControlField(Horizon(sys, opts), std::move(values)));
}

WaypointSynthesis SynthesizeThroughWaypoints(const QuantumSystem& sys,
                                             const WaypointSet& set,
                                             const SteerOptions& opts) {
  ValidateOptions(opts);
  if (set.dim() != sys.dim()) {
    throw std::invalid_argument("SynthesizeThroughWaypoints: dimension mismatch");
  }
  RequireControllable(sys);

  std::vector<SynthesisResult> segments;
  std::vector<ControlField> parts;
  UnitaryMatrix reached = UnitaryMatrix::Identity(sys.dim());
  for (int k = 0; k < set.size(); ++k) {
    const UnitaryMatrix& waypoint = set.unitaries()[static_cast<size_t>(k)];
    SteerOptions segment_opts = opts;
    segment_opts.seed = opts.seed + static_cast<std::uint64_t>(k);
    SynthesisResult seg =
        SynthesizeToTarget(sys, waypoint * reached.adjoint(), segment_opts);
    reached = PropagateFinal(sys, seg.field) * reached;
    parts.push_back(seg.field);
    segments.push_back(std::move(seg));
  }

  ControlField field = ControlField::Concatenate(parts);
  PropagatorTrajectory trajectory = Propagate(sys, field);
  std::vector<WaypointVisit> visits =
      WaypointVisits(trajectory, set, 1.0 - opts.fid_target);
  SpanReport span = TrajectoryIndependence(trajectory);
  bool all_visited = true;
  for (const WaypointVisit& v : visits) all_visited = all_visited && v.visited;
  return WaypointSynthesis{std::move(field),      std::move(segments),
                           std::move(trajectory), std::move(visits),
                           std::move(span),       all_visited};
}

}  // namespace qcl
