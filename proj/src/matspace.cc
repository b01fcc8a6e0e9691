#include "qcl/matspace.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcl {
namespace {

void RequireSquare(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
}

void RequirePair(int i, int j, int n) {
  if (i == j) {
    throw std::invalid_argument("2x2 block indices must differ");
  }
  if (i < 1 || j < 1 || i > n || j > n || i > j) {
    throw std::invalid_argument("2x2 block indices must satisfy 1 <= i < j <= " +
                                std::to_string(n));
  }
}

}  // namespace

HermitianZT::HermitianZT(CMatrix m, double tol) : m_(std::move(m)) {
  RequireSquare(m_, "HermitianZT");
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw std::invalid_argument("matrix is not Hermitian (max |m - m*| = " +
                                std::to_string(asym) + ")");
  }
  if (std::abs(m_.trace()) >= tol * (1.0 + m_.norm())) {
    throw std::invalid_argument("matrix is not traceless");
  }
}

HermitianZT HermitianZT::Project(const CMatrix& m) {
  RequireSquare(m, "HermitianZT::Project");
  const auto n = m.rows();
  CMatrix h = 0.5 * (m + m.adjoint());
  const double shift = h.trace().real() / static_cast<double>(n);
  h.diagonal().array() -= shift;
  for (Eigen::Index k = 0; k < n; ++k) {
    h(k, k) = Complex(h(k, k).real(), 0.0);
  }
  return HermitianZT(std::move(h), Trusted{});
}

HermitianZT HermitianZT::Zero(int n) {
  return HermitianZT(CMatrix::Zero(n, n), Trusted{});
}

UnitaryMatrix::UnitaryMatrix(CMatrix u, double tol) : u_(std::move(u)) {
  RequireSquare(u_, "UnitaryMatrix");
  const double defect = UnitarityDefect(u_);
  if (!(defect < tol)) {
    throw std::invalid_argument("matrix is not unitary (|U*U - I|_F = " +
                                std::to_string(defect) + ")");
  }
}

UnitaryMatrix UnitaryMatrix::Identity(int n) {
  return UnitaryMatrix(CMatrix::Identity(n, n), Trusted{});
}

UnitaryMatrix UnitaryMatrix::adjoint() const {
  return UnitaryMatrix(u_.adjoint(), Trusted{});
}

UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("unitary product: dimension mismatch");
  }
  return UnitaryMatrix(a.u_ * b.u_, UnitaryMatrix::Trusted{});
}

double UnitarityDefect(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

double HsInner(const HermitianZT& a, const HermitianZT& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("HsInner: dimension mismatch");
  }
  // Tr(AB) = sum_ij A_ij B_ji
  const Complex tr = a.matrix().cwiseProduct(b.matrix().transpose()).sum();
  if (std::abs(tr.imag()) > 1e-12 * std::max(1.0, a.norm() * b.norm())) {
    throw std::logic_error("HsInner: non-real trace for Hermitian arguments");
  }
  return tr.real();
}

Block2 Submatrix2x2(const CMatrix& m, int i, int j) {
  RequireSquare(m, "Submatrix2x2");
  RequirePair(i, j, static_cast<int>(m.rows()));
  const int a = i - 1;
  const int b = j - 1;
  Block2 out;
  out << m(a, a), m(a, b), m(b, a), m(b, b);
  return out;
}

CMatrix Embed2x2(const Block2& d, int i, int j, int n) {
  RequirePair(i, j, n);
  const int a = i - 1;
  const int b = j - 1;
  CMatrix out = CMatrix::Identity(n, n);
  out(a, a) = d(0, 0);
  out(a, b) = d(0, 1);
  out(b, a) = d(1, 0);
  out(b, b) = d(1, 1);
  return out;
}

std::vector<HermitianZT> BasisZeroTrace(int n) {
  if (n < 2) {
    throw std::invalid_argument("BasisZeroTrace: dimension must be >= 2");
  }
  const double r = 1.0 / std::sqrt(2.0);
  const Complex I(0.0, 1.0);
  std::vector<HermitianZT> basis;
  basis.reserve(static_cast<size_t>(n * n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      CMatrix m = CMatrix::Zero(n, n);
      m(i, j) = r;
      m(j, i) = r;
      basis.push_back(HermitianZT::Project(m));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      CMatrix m = CMatrix::Zero(n, n);
      m(i, j) = -I * r;
      m(j, i) = I * r;
      basis.push_back(HermitianZT::Project(m));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 1.0 / std::sqrt(static_cast<double>(k * (k + 1)));
    CMatrix m = CMatrix::Zero(n, n);
    for (int p = 0; p < k; ++p) m(p, p) = s;
    m(k, k) = -k * s;
    basis.push_back(HermitianZT(std::move(m)));
  }
  return basis;
}

RealVector ToCoords(const HermitianZT& z, std::span<const HermitianZT> basis) {
  RealVector c(static_cast<Eigen::Index>(basis.size()));
  for (size_t k = 0; k < basis.size(); ++k) {
    c(static_cast<Eigen::Index>(k)) = HsInner(basis[k], z);
  }
  return c;
}

ZeroTraceBasis::ZeroTraceBasis(std::vector<HermitianZT> elements)
    : n_(elements.empty() ? 0 : elements.front().dim()),
      elements_(std::move(elements)) {
  if (n_ < 2 || static_cast<int>(elements_.size()) != n_ * n_ - 1) {
    throw std::invalid_argument("ZeroTraceBasis: need N^2 - 1 elements, N >= 2");
  }
  for (size_t a = 0; a < elements_.size(); ++a) {
    if (elements_[a].dim() != n_) {
      throw std::invalid_argument("ZeroTraceBasis: dimension mismatch");
    }
    for (size_t b = a; b < elements_.size(); ++b) {
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(HsInner(elements_[a], elements_[b]) - expected) > 1e-10) {
        throw std::invalid_argument("ZeroTraceBasis: basis is not orthonormal");
      }
    }
  }
}

ZeroTraceBasis ZeroTraceBasis::GellMann(int n) {
  return ZeroTraceBasis(BasisZeroTrace(n));
}

RealVector ZeroTraceBasis::Coords(const HermitianZT& z) const {
  if (z.dim() != n_) {
    throw std::invalid_argument("ZeroTraceBasis::Coords: dimension mismatch");
  }
  return ToCoords(z, elements_);
}

HermitianZT ZeroTraceBasis::FromCoords(const RealVector& c) const {
  if (c.size() != size()) {
    throw std::invalid_argument("ZeroTraceBasis::FromCoords: length mismatch");
  }
  CMatrix m = CMatrix::Zero(n_, n_);
  for (int k = 0; k < size(); ++k) {
    m += c(k) * elements_[static_cast<size_t>(k)].matrix();
  }
  return HermitianZT::Project(m);
}

}  // namespace qcl
