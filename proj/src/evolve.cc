#include "qcl/evolve.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qcl {
namespace {

using nlohmann::json;

void RequireSameDim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
}

double Sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

ControlField::ControlField(double horizon, std::vector<double> values)
    : horizon_(horizon), values_(std::move(values)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw std::invalid_argument("ControlField: horizon must be positive");
  }
  if (values_.empty()) {
    throw std::invalid_argument("ControlField: need at least one step");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ControlField: values must be finite");
    }
  }
}

ControlField ControlField::Constant(double horizon, int steps, double value) {
  if (steps < 1) throw std::invalid_argument("ControlField: steps must be >= 1");
  return ControlField(horizon, std::vector<double>(static_cast<size_t>(steps), value));
}

double ControlField::time(int m) const {
  return horizon_ * static_cast<double>(m) / static_cast<double>(values_.size());
}

ControlField ControlField::Concatenate(const std::vector<ControlField>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("ControlField::Concatenate: no parts");
  }
  const double dt = parts.front().dt();
  double horizon = 0.0;
  std::vector<double> values;
  for (const ControlField& p : parts) {
    if (std::abs(p.dt() - dt) > 1e-12 * dt) {
      throw std::invalid_argument(
          "ControlField::Concatenate: parts must share the step length");
    }
    horizon += p.horizon();
    values.insert(values.end(), p.values().begin(), p.values().end());
  }
  return ControlField(horizon, std::move(values));
}

DensityMatrix::DensityMatrix(CMatrix rho, double tol) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 1) {
    throw std::invalid_argument("DensityMatrix: must be square");
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > tol) {
    throw std::invalid_argument("DensityMatrix: trace must be 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::Pure(int n, int level) {
  if (level < 0 || level >= n) {
    throw std::invalid_argument("DensityMatrix::Pure: level out of range");
  }
  CMatrix rho = CMatrix::Zero(n, n);
  rho(level, level) = 1.0;
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::MaximallyMixed(int n) {
  return DensityMatrix(CMatrix::Identity(n, n) / static_cast<double>(n));
}

PropagatorTrajectory::PropagatorTrajectory(std::vector<double> times,
                                           std::vector<UnitaryMatrix> unitaries,
                                           const HermitianZT& mu)
    : times_(std::move(times)), unitaries_(std::move(unitaries)) {
  if (unitaries_.empty() || times_.size() != unitaries_.size()) {
    throw std::invalid_argument(
        "PropagatorTrajectory: need one time per unitary, at least one node");
  }
  dipoles_.reserve(unitaries_.size());
  for (const UnitaryMatrix& u : unitaries_) {
    dipoles_.push_back(ConjugatedDipole(u, mu));
  }
}

CMatrix StepPropagator(const RealMatrix& hamiltonian, double dt) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(hamiltonian);
  const RealMatrix& q = es.eigenvectors();
  const RealVector& lambda = es.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    phases(k) = std::polar(1.0, -dt * lambda(k));
  }
  const CMatrix qc = q.cast<Complex>();
  return qc * phases.asDiagonal() * qc.transpose();
}

StepWithDerivative StepAndDerivative(const QuantumSystem& sys, double amplitude,
                                     double dt) {
  const RealMatrix h = sys.h0() - amplitude * sys.mu();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  const RealMatrix& q = es.eigenvectors();
  const RealVector& lambda = es.eigenvalues();
  const Eigen::Index n = lambda.size();

  Eigen::VectorXcd phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::polar(1.0, -dt * lambda(k));

  // Direction dH/dε = -μ, in the eigenbasis.
  const RealMatrix direction = -(q.transpose() * sys.mu() * q);
  CMatrix kernel(n, n);
  const Complex minus_i_dt(0.0, -dt);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double mean = 0.5 * (lambda(a) + lambda(b));
      const double half_gap = 0.5 * dt * (lambda(a) - lambda(b));
      kernel(a, b) = minus_i_dt * std::polar(1.0, -dt * mean) *
                     Sinc(half_gap) * direction(a, b);
    }
  }
  const CMatrix qc = q.cast<Complex>();
  StepWithDerivative out;
  out.propagator = qc * phases.asDiagonal() * qc.transpose();
  out.derivative = qc * kernel * qc.transpose();
  return out;
}

PropagatorTrajectory Propagate(const QuantumSystem& sys,
                               const ControlField& field) {
  const int n = sys.dim();
  const double dt = field.dt();
  std::vector<double> times;
  std::vector<UnitaryMatrix> us;
  times.reserve(static_cast<size_t>(field.steps() + 1));
  us.reserve(static_cast<size_t>(field.steps() + 1));
  times.push_back(0.0);
  us.push_back(UnitaryMatrix::Identity(n));
  CMatrix current = CMatrix::Identity(n, n);
  for (int m = 0; m < field.steps(); ++m) {
    current = StepPropagator(sys.h0() - field.value(m) * sys.mu(), dt) * current;
    times.push_back(field.time(m + 1));
    us.emplace_back(current);
  }
  return PropagatorTrajectory(std::move(times), std::move(us), sys.mu_zt());
}

UnitaryMatrix PropagateFinal(const QuantumSystem& sys,
                             const ControlField& field) {
  const int n = sys.dim();
  CMatrix current = CMatrix::Identity(n, n);
  for (int m = 0; m < field.steps(); ++m) {
    current =
        StepPropagator(sys.h0() - field.value(m) * sys.mu(), field.dt()) * current;
  }
  return UnitaryMatrix(std::move(current));
}

HermitianZT ConjugatedDipole(const UnitaryMatrix& u, const HermitianZT& mu) {
  RequireSameDim(u.dim(), mu.dim(), "ConjugatedDipole");
  return HermitianZT::Project(u.matrix().adjoint() * mu.matrix() * u.matrix());
}

std::vector<DensityMatrix> EvolveDensity(const PropagatorTrajectory& traj,
                                         const DensityMatrix& rho0) {
  RequireSameDim(traj.dim(), rho0.dim(), "EvolveDensity");
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<size_t>(traj.size()));
  for (const UnitaryMatrix& u : traj.unitaries()) {
    const CMatrix rho = u.matrix() * rho0.matrix() * u.matrix().adjoint();
    out.emplace_back(0.5 * (rho + rho.adjoint()));
  }
  return out;
}

double Expectation(const DensityMatrix& rho, const CMatrix& obs) {
  if (obs.rows() != obs.cols()) {
    throw std::invalid_argument("Expectation: observable must be square");
  }
  RequireSameDim(rho.dim(), static_cast<int>(obs.rows()), "Expectation");
  if ((obs - obs.adjoint()).cwiseAbs().maxCoeff() >
      kHermitianTol * (1.0 + obs.norm())) {
    throw std::invalid_argument("Expectation: observable must be Hermitian");
  }
  return rho.matrix().cwiseProduct(obs.transpose()).sum().real();
}

ControlField LoadField(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("control field document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("T") || !doc.contains("values")) {
    throw ParseError("control field document needs fields 'T' and 'values'");
  }
  if (!doc["T"].is_number() || !doc["values"].is_array()) {
    throw ParseError("control field: 'T' must be a number, 'values' an array");
  }
  std::vector<double> values;
  for (const json& v : doc["values"]) {
    if (!v.is_number()) throw ParseError("control field: non-numeric value");
    values.push_back(v.get<double>());
  }
  if (doc.contains("M")) {
    if (!doc["M"].is_number_integer() ||
        doc["M"].get<long long>() != static_cast<long long>(values.size())) {
      throw ParseError("control field: 'M' does not match the number of values");
    }
  }
  try {
    return ControlField(doc["T"].get<double>(), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

ControlField LoadFieldFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open control field file: " + path);
  return LoadField(in);
}

void SaveField(std::ostream& out, const ControlField& field) {
  out << "{\n  \"T\": " << FormatReal(field.horizon())
      << ",\n  \"M\": " << field.steps() << ",\n  \"values\": [\n";
  for (int m = 0; m < field.steps(); ++m) {
    out << "    " << FormatReal(field.value(m))
        << (m + 1 < field.steps() ? ",\n" : "\n");
  }
  out << "  ]\n}\n";
}

void WriteTrajectoryCsv(std::ostream& out, const PropagatorTrajectory& traj) {
  const int n = traj.dim();
  out << "t";
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      out << ",re_U" << i << "_" << j << ",im_U" << i << "_" << j;
    }
  }
  out << "\n";
  for (int m = 0; m < traj.size(); ++m) {
    out << FormatReal(traj.times()[static_cast<size_t>(m)]);
    const CMatrix& u = traj.unitaries()[static_cast<size_t>(m)].matrix();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out << "," << FormatReal(u(i, j).real()) << "," << FormatReal(u(i, j).imag());
      }
    }
    out << "\n";
  }
}

}  // namespace qcl
