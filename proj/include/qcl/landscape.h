#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qcl/evolve.h"
#include "qcl/matspace.h"
#include "qcl/model.h"
#include "qcl/waypoints.h"

namespace qcl {

/// Relative singular value threshold for span rank decisions.
inline constexpr double kRankTol = 1e-8;

/// Linear span of a set of traceless Hermitian matrices in the
/// N^2 - 1 dimensional real space.
struct SpanReport {
  int dim = 0;    ///< N
  int count = 0;  ///< number of input matrices
  /// Descending; min(count, N^2 - 1) values.
  RealVector singular_values;
  int rank = 0;
  bool full = false;
  /// sigma_{N^2-1} / sigma_max, or 0 when fewer than N^2 - 1 values exist.
  double min_ratio = 0.0;
  /// Orthonormal basis of the orthogonal complement; empty iff full.
  std::vector<HermitianZT> complement_basis;
};

/// Stacks Gell-Mann coordinates of the inputs as rows and takes an SVD;
/// rank = #{sigma_k > rank_tol * sigma_max}.
SpanReport SpanningRank(std::span<const HermitianZT> mats,
                        double rank_tol = kRankTol);

/// SpanningRank over the conjugated dipoles at the given nodes (all nodes
/// by default). A full verdict holds at the sample resolution only.
SpanReport TrajectoryIndependence(
    const PropagatorTrajectory& traj,
    const std::optional<std::vector<int>>& sample_indices = std::nullopt);

/// |Tr(W* U)| / N.
double PhaseInvariantFidelity(const CMatrix& w, const CMatrix& u);

struct WaypointVisit {
  int waypoint = 0;  ///< 0-based position in the set
  double fidelity = 0.0;
  int node = 0;  ///< trajectory node achieving the best fidelity
  double time = 0.0;
  bool visited = false;  ///< fidelity >= 1 - fid_tol
};

std::vector<WaypointVisit> WaypointVisits(const PropagatorTrajectory& traj,
                                          const WaypointSet& set,
                                          double fid_tol);

using GradientVector = RealVector;

/// <O>(T) = Tr(U_M ρ0 U_M* O).
double Objective(const QuantumSystem& sys, const ControlField& field,
                 const DensityMatrix& rho0, const CMatrix& obs);

/// d<O>(T)/dε_m for every step, exact for the piecewise-constant
/// parameterization: g_m = 2 Re Tr(O B_m dS_m U_{m-1} ρ0 U_M*), with
/// B_m = S_M ... S_{m+1} and dS_m the exact step derivative.
GradientVector Gradient(const QuantumSystem& sys, const ControlField& field,
                        const DensityMatrix& rho0, const CMatrix& obs);

/// |[U_T* O U_T, ρ0]|_F; zero exactly at kinematic critical points.
double KinematicResidual(const UnitaryMatrix& u_final, const DensityMatrix& rho0,
                         const CMatrix& obs);

/// CSV of singular values, a verdict line `FULL` or `DEFICIENT rank=r`, and
/// for deficient spans the complement basis in the way-point layout.
void WriteSpanReport(std::ostream& out, const SpanReport& report);

}  // namespace qcl
