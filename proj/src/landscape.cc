#include "qcl/landscape.h"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qcl {

SpanReport SpanningRank(std::span<const HermitianZT> mats, double rank_tol) {
  if (mats.empty()) throw std::invalid_argument("SpanningRank: empty list");
  const int n = mats.front().dim();
  for (const HermitianZT& m : mats) {
    if (m.dim() != n) throw std::invalid_argument("SpanningRank: mixed dimensions");
  }
  const ZeroTraceBasis basis = ZeroTraceBasis::GellMann(n);
  const int space = basis.size();
  RealMatrix coords(static_cast<Eigen::Index>(mats.size()), space);
  for (size_t r = 0; r < mats.size(); ++r) {
    coords.row(static_cast<Eigen::Index>(r)) = basis.Coords(mats[r]).transpose();
  }

  Eigen::BDCSVD<RealMatrix> svd(coords, Eigen::ComputeFullV);
  SpanReport report;
  report.dim = n;
  report.count = static_cast<int>(mats.size());
  report.singular_values = svd.singularValues();
  const double smax =
      report.singular_values.size() ? report.singular_values(0) : 0.0;
  for (Eigen::Index k = 0; k < report.singular_values.size(); ++k) {
    if (report.singular_values(k) > rank_tol * smax) ++report.rank;
  }
  report.full = report.rank == space;
  if (report.singular_values.size() == space && smax > 0.0) {
    report.min_ratio = report.singular_values(space - 1) / smax;
  }
  const RealMatrix& v = svd.matrixV();
  for (int k = report.rank; k < space; ++k) {
    report.complement_basis.push_back(basis.FromCoords(v.col(k)));
  }
  return report;
}

SpanReport TrajectoryIndependence(
    const PropagatorTrajectory& traj,
    const std::optional<std::vector<int>>& sample_indices) {
  if (!sample_indices) return SpanningRank(traj.dipoles());
  if (sample_indices->empty()) {
    throw std::invalid_argument("TrajectoryIndependence: no sample indices");
  }
  std::vector<HermitianZT> picked;
  picked.reserve(sample_indices->size());
  for (int idx : *sample_indices) {
    if (idx < 0 || idx >= traj.size()) {
      throw std::invalid_argument("TrajectoryIndependence: sample index " +
                                  std::to_string(idx) + " out of range");
    }
    picked.push_back(traj.dipoles()[static_cast<size_t>(idx)]);
  }
  return SpanningRank(picked);
}

double PhaseInvariantFidelity(const CMatrix& w, const CMatrix& u) {
  if (w.rows() != u.rows() || w.cols() != u.cols()) {
    throw std::invalid_argument("PhaseInvariantFidelity: dimension mismatch");
  }
  // Tr(W* U) = sum_ij conj(W_ij) U_ij
  return std::abs(w.cwiseProduct(u.conjugate()).sum()) /
         static_cast<double>(w.rows());
}

std::vector<WaypointVisit> WaypointVisits(const PropagatorTrajectory& traj,
                                          const WaypointSet& set,
                                          double fid_tol) {
  if (traj.dim() != set.dim()) {
    throw std::invalid_argument("WaypointVisits: dimension mismatch");
  }
  std::vector<WaypointVisit> visits;
  for (int w = 0; w < set.size(); ++w) {
    const CMatrix& target = set.unitaries()[static_cast<size_t>(w)].matrix();
    WaypointVisit visit;
    visit.waypoint = w;
    visit.fidelity = -1.0;
    for (int m = 0; m < traj.size(); ++m) {
      const double f = PhaseInvariantFidelity(
          target, traj.unitaries()[static_cast<size_t>(m)].matrix());
      if (f > visit.fidelity) {
        visit.fidelity = f;
        visit.node = m;
      }
    }
    visit.time = traj.times()[static_cast<size_t>(visit.node)];
    visit.visited = visit.fidelity >= 1.0 - fid_tol;
    visits.push_back(visit);
  }
  return visits;
}

double Objective(const QuantumSystem& sys, const ControlField& field,
                 const DensityMatrix& rho0, const CMatrix& obs) {
  const UnitaryMatrix u = PropagateFinal(sys, field);
  const CMatrix rho = u.matrix() * rho0.matrix() * u.matrix().adjoint();
  return Expectation(DensityMatrix(0.5 * (rho + rho.adjoint())), obs);
}

GradientVector Gradient(const QuantumSystem& sys, const ControlField& field,
                        const DensityMatrix& rho0, const CMatrix& obs) {
  const int n = sys.dim();
  if (rho0.dim() != n || obs.rows() != n || obs.cols() != n) {
    throw std::invalid_argument("Gradient: dimension mismatch");
  }
  const int steps = field.steps();
  const double dt = field.dt();

  std::vector<StepWithDerivative> step;
  step.reserve(static_cast<size_t>(steps));
  // forward[m] = U_m, m = 0..M
  std::vector<CMatrix> forward(static_cast<size_t>(steps + 1));
  forward[0] = CMatrix::Identity(n, n);
  for (int m = 0; m < steps; ++m) {
    step.push_back(StepAndDerivative(sys, field.value(m), dt));
    forward[static_cast<size_t>(m + 1)] =
        step.back().propagator * forward[static_cast<size_t>(m)];
  }

  // Tr(O B dS U_{m-1} ρ0 U_M*) = Tr(dS · U_{m-1} X B) with X = ρ0 U_M* O.
  const CMatrix x = rho0.matrix() * forward.back().adjoint() * obs;
  GradientVector g(steps);
  CMatrix after = CMatrix::Identity(n, n);  // S_M ... S_{m+1}
  for (int m = steps - 1; m >= 0; --m) {
    const CMatrix a = forward[static_cast<size_t>(m)] * x * after;
    const Complex tr =
        step[static_cast<size_t>(m)].derivative.cwiseProduct(a.transpose()).sum();
    g(m) = 2.0 * tr.real();
    after = after * step[static_cast<size_t>(m)].propagator;
  }
  return g;
}

double KinematicResidual(const UnitaryMatrix& u_final, const DensityMatrix& rho0,
                         const CMatrix& obs) {
  if (u_final.dim() != rho0.dim() || obs.rows() != u_final.dim() ||
      obs.cols() != u_final.dim()) {
    throw std::invalid_argument("KinematicResidual: dimension mismatch");
  }
  const CMatrix& u = u_final.matrix();
  const CMatrix heis = u.adjoint() * obs * u;
  return (heis * rho0.matrix() - rho0.matrix() * heis).norm();
}

void WriteSpanReport(std::ostream& out, const SpanReport& report) {
  out << "index,singular_value\n";
  for (Eigen::Index k = 0; k < report.singular_values.size(); ++k) {
    out << k + 1 << "," << FormatReal(report.singular_values(k)) << "\n";
  }
  if (report.full) {
    out << "FULL\n";
    return;
  }
  out << "DEFICIENT rank=" << report.rank << "\n";
  std::vector<CMatrix> complement;
  for (const HermitianZT& z : report.complement_basis) complement.push_back(z.matrix());
  WriteMatrixDocument(out, "complement", complement);
}

}  // namespace qcl
