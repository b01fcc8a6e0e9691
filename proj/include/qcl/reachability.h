#pragma once

#include <vector>

#include "qcl/matspace.h"
#include "qcl/model.h"

namespace qcl {

struct LieClosureResult {
  int dimension = 0;
  /// Skew-Hermitian, orthonormal under <A, B> = Re Tr(A* B).
  std::vector<CMatrix> basis;
  Controllability verdict = Controllability::kNo;
};

/// Lie algebra generated by -i h0 and -i mu inside u(N).
///
/// Generators are normalized to unit HS norm and orthonormalized; then
/// commutators of basis pairs are appended breadth first (each new element is
/// bracketed against all earlier ones) after Gram-Schmidt projection. A
/// candidate is accepted when its residual exceeds
/// max(1e-10 * |candidate|, 1e-13). Stops at closure or at dimension N^2.
LieClosureResult LieClosure(const RealMatrix& h0, const RealMatrix& mu);

Controllability IsControllable(const QuantumSystem& sys);

}  // namespace qcl
