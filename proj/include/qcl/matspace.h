#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Block2 = Eigen::Matrix2cd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Per-entry tolerance for Hermiticity of constructed values.
inline constexpr double kHermitianTol = 1e-12;
/// Frobenius tolerance on U*U - I.
inline constexpr double kUnitaryTol = 1e-10;

/// A traceless Hermitian matrix, i.e. an element of the real vector space
/// i*su(N) equipped with the Hilbert-Schmidt inner product Tr(AB).
class HermitianZT {
 public:
  /// Validates the input: |m - m*| <= tol per entry and
  /// |Tr m| < tol * (1 + |m|_F). Throws std::invalid_argument otherwise.
  explicit HermitianZT(CMatrix m, double tol = kHermitianTol);

  /// Hermitian, traceless part of an arbitrary square matrix:
  /// (m + m*)/2 - Tr(m)/N * I. Never throws for square input.
  static HermitianZT Project(const CMatrix& m);

  static HermitianZT Zero(int n);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  double norm() const { return m_.norm(); }

 private:
  struct Trusted {};
  HermitianZT(CMatrix m, Trusted) : m_(std::move(m)) {}

  CMatrix m_;
};

/// An element of U(N).
class UnitaryMatrix {
 public:
  /// Throws std::invalid_argument unless |u*u - I|_F < tol.
  explicit UnitaryMatrix(CMatrix u, double tol = kUnitaryTol);

  static UnitaryMatrix Identity(int n);

  int dim() const { return static_cast<int>(u_.rows()); }
  const CMatrix& matrix() const { return u_; }
  UnitaryMatrix adjoint() const;

  friend UnitaryMatrix operator*(const UnitaryMatrix& a,
                                 const UnitaryMatrix& b);

 private:
  struct Trusted {};
  UnitaryMatrix(CMatrix u, Trusted) : u_(std::move(u)) {}

  CMatrix u_;
};

/// |u*u - I|_F.
double UnitarityDefect(const CMatrix& u);

/// Canonical scalar product <a, b> = Tr(a b) on traceless Hermitian matrices.
double HsInner(const HermitianZT& a, const HermitianZT& b);

/// The 2x2 block [[m_ii, m_ij], [m_ji, m_jj]]. Indices are 1-based with
/// 1 <= i < j <= N.
Block2 Submatrix2x2(const CMatrix& m, int i, int j);

/// The n x n identity with rows/columns i, j (1-based) overwritten by d, so
/// that Submatrix2x2(Embed2x2(d, i, j, n), i, j) == d.
CMatrix Embed2x2(const Block2& d, int i, int j, int n);

/// Orthonormal generalized Gell-Mann basis of traceless Hermitian n x n
/// matrices. Ordering: symmetric pairs (E_ij + E_ji)/sqrt2 for i < j in
/// lexicographic order, then antisymmetric pairs (-i E_ij + i E_ji)/sqrt2 in
/// the same order, then diag(1, ..., 1, -k, 0, ...)/sqrt(k(k+1)) for
/// k = 1..n-1.
std::vector<HermitianZT> BasisZeroTrace(int n);

/// Coordinates c_k = <basis_k, z>. The basis must be orthonormal; see
/// ZeroTraceBasis for a validated wrapper.
RealVector ToCoords(const HermitianZT& z, std::span<const HermitianZT> basis);

/// A validated orthonormal basis of the N^2 - 1 dimensional space, used as
/// the coordinate map for rank computations.
class ZeroTraceBasis {
 public:
  /// Throws std::invalid_argument if the elements are not orthonormal within
  /// 1e-10 or the count is not N^2 - 1.
  explicit ZeroTraceBasis(std::vector<HermitianZT> elements);

  static ZeroTraceBasis GellMann(int n);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const std::vector<HermitianZT>& elements() const { return elements_; }

  RealVector Coords(const HermitianZT& z) const;
  HermitianZT FromCoords(const RealVector& c) const;

 private:
  int n_;
  std::vector<HermitianZT> elements_;
};

}  // namespace qcl
