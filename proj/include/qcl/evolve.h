#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qcl/errors.h"
#include "qcl/matspace.h"
#include "qcl/model.h"

namespace qcl {

/// Piecewise-constant control on a uniform grid: value ε_m on
/// [(m-1)Δt, mΔt), Δt = T/M.
class ControlField {
 public:
  /// Throws std::invalid_argument unless horizon > 0, values nonempty and
  /// finite.
  ControlField(double horizon, std::vector<double> values);

  static ControlField Constant(double horizon, int steps, double value);

  double horizon() const { return horizon_; }
  int steps() const { return static_cast<int>(values_.size()); }
  double dt() const { return horizon_ / static_cast<double>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  double value(int m) const { return values_[static_cast<size_t>(m)]; }
  /// Grid node t_m = T m / M, m = 0..M.
  double time(int m) const;

  /// Concatenation on [0, T_a + T_b]. Both fields must share Δt within 1e-12
  /// relative so that the result stays on a uniform grid.
  static ControlField Concatenate(const std::vector<ControlField>& parts);

 private:
  double horizon_;
  std::vector<double> values_;
};

class DensityMatrix {
 public:
  /// Hermitian within 1e-12 per entry, unit trace and eigenvalues >= -tol.
  explicit DensityMatrix(CMatrix rho, double tol = 1e-10);

  static DensityMatrix Pure(int n, int level);
  static DensityMatrix MaximallyMixed(int n);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }

 private:
  CMatrix rho_;
};

/// U(t_m, 0) and the conjugated dipole U_m* μ U_m at every grid node.
class PropagatorTrajectory {
 public:
  /// Builds a trajectory from explicit nodes; μ̂ is computed for each node.
  PropagatorTrajectory(std::vector<double> times,
                       std::vector<UnitaryMatrix> unitaries,
                       const HermitianZT& mu);

  int size() const { return static_cast<int>(unitaries_.size()); }
  int dim() const { return unitaries_.front().dim(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<UnitaryMatrix>& unitaries() const { return unitaries_; }
  const std::vector<HermitianZT>& dipoles() const { return dipoles_; }
  const UnitaryMatrix& final() const { return unitaries_.back(); }

 private:
  std::vector<double> times_;
  std::vector<UnitaryMatrix> unitaries_;
  std::vector<HermitianZT> dipoles_;
};

/// exp(-i dt H) for real symmetric H, by eigendecomposition.
CMatrix StepPropagator(const RealMatrix& hamiltonian, double dt);

struct StepWithDerivative {
  CMatrix propagator;  ///< exp(-i dt (H0 - ε μ))
  CMatrix derivative;  ///< d/dε of the above, exact (no midpoint rule)
};

/// One step propagator and its exact derivative with respect to the step
/// amplitude. The derivative is the Fréchet derivative of exp(-i dt H) in
/// the direction -μ, evaluated in the eigenbasis of H with divided
/// differences written as -i dt e^{-i dt (a+b)/2} sinc(dt (a-b)/2), which is
/// stable for (near-)degenerate eigenvalues.
StepWithDerivative StepAndDerivative(const QuantumSystem& sys, double amplitude,
                                     double dt);

/// U_m = exp(-i Δt (H0 - ε_m μ)) U_{m-1}, U_0 = I.
PropagatorTrajectory Propagate(const QuantumSystem& sys,
                               const ControlField& field);

/// Endpoint only, without building the trajectory.
UnitaryMatrix PropagateFinal(const QuantumSystem& sys,
                             const ControlField& field);

/// u* μ u.
HermitianZT ConjugatedDipole(const UnitaryMatrix& u, const HermitianZT& mu);

/// ρ_m = U_m ρ0 U_m* at every node.
std::vector<DensityMatrix> EvolveDensity(const PropagatorTrajectory& traj,
                                         const DensityMatrix& rho0);

/// Tr(ρ O) for Hermitian O (trace-free not required).
double Expectation(const DensityMatrix& rho, const CMatrix& obs);

/// Control field document: {"T": ..., "M": ..., "values": [...]}.
ControlField LoadField(std::istream& in);
ControlField LoadFieldFile(const std::string& path);
void SaveField(std::ostream& out, const ControlField& field);

/// CSV with columns t, then Re/Im of every U entry in row-major order.
void WriteTrajectoryCsv(std::ostream& out, const PropagatorTrajectory& traj);

}  // namespace qcl
