#include "qcl/reachability.h"

#include <cmath>
#include <stdexcept>

namespace qcl {
namespace {

constexpr double kRelativeRankTol = 1e-10;
constexpr double kAbsoluteFloor = 1e-13;

double RealInner(const CMatrix& a, const CMatrix& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

// Appends the normalized residual of `candidate` to `basis` if it carries a
// new direction.
bool TryAppend(std::vector<CMatrix>& basis, CMatrix candidate) {
  const double before = candidate.norm();
  if (before < kAbsoluteFloor) return false;
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass) {
    for (const CMatrix& b : basis) candidate -= RealInner(b, candidate) * b;
  }
  const double residual = candidate.norm();
  if (residual <= std::max(kRelativeRankTol * before, kAbsoluteFloor)) {
    return false;
  }
  basis.push_back(candidate / residual);
  return true;
}

}  // namespace

LieClosureResult LieClosure(const RealMatrix& h0, const RealMatrix& mu) {
  if (h0.rows() != h0.cols() || mu.rows() != mu.cols() ||
      h0.rows() != mu.rows()) {
    throw std::invalid_argument("LieClosure: generators must be square and of equal size");
  }
  const Eigen::Index n = h0.rows();
  const size_t full = static_cast<size_t>(n * n);
  const Complex minus_i(0.0, -1.0);

  std::vector<CMatrix> basis;
  for (const RealMatrix* g : {&h0, &mu}) {
    const double norm = g->norm();
    if (norm > 0.0) TryAppend(basis, minus_i * g->cast<Complex>() / norm);
  }
  for (size_t k = 0; k < basis.size() && basis.size() < full; ++k) {
    for (size_t j = 0; j < k && basis.size() < full; ++j) {
      // basis may reallocate inside TryAppend, so copy the operands first.
      const CMatrix a = basis[j];
      const CMatrix b = basis[k];
      TryAppend(basis, a * b - b * a);
    }
  }

  LieClosureResult result;
  result.dimension = static_cast<int>(basis.size());
  if (basis.size() == full) {
    result.verdict = Controllability::kU;
  } else if (basis.size() + 1 == full) {
    bool traceless = true;
    for (const CMatrix& b : basis) {
      if (std::abs(b.trace()) > 1e-10) traceless = false;
    }
    result.verdict = traceless ? Controllability::kSU : Controllability::kNo;
  }
  result.basis = std::move(basis);
  return result;
}

Controllability IsControllable(const QuantumSystem& sys) {
  return LieClosure(sys.h0(), sys.mu()).verdict;
}

}  // namespace qcl
