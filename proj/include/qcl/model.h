#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "qcl/errors.h"
#include "qcl/matspace.h"

namespace qcl {

enum class Controllability { kSU, kU, kNo };

std::string_view ToString(Controllability c);

/// An N-level system with real symmetric field-free Hamiltonian h0 and real
/// symmetric traceless dipole mu (hbar = 1).
class QuantumSystem {
 public:
  /// Throws ValidationError naming the violated condition and the offending
  /// entry (1-based) when h0 or mu is not real symmetric, mu has nonzero
  /// trace, shapes disagree or entries are not finite.
  static QuantumSystem Create(RealMatrix h0, RealMatrix mu,
                              std::string label = {});

  int dim() const { return static_cast<int>(h0_.rows()); }
  const RealMatrix& h0() const { return h0_; }
  const RealMatrix& mu() const { return mu_; }
  const std::string& label() const { return label_; }

  CMatrix h0_complex() const { return h0_.cast<Complex>(); }
  HermitianZT mu_zt() const;

 private:
  QuantumSystem(RealMatrix h0, RealMatrix mu, std::string label)
      : h0_(std::move(h0)), mu_(std::move(mu)), label_(std::move(label)) {}

  RealMatrix h0_;
  RealMatrix mu_;
  std::string label_;
};

struct HypothesisReport {
  bool zero_trace = false;
  bool symmetric = false;
  /// min_{i != j} |mu_ij| > offdiag_tol.
  bool offdiag_nonzero = false;
  Controllability controllable = Controllability::kNo;

  double trace = 0.0;
  double min_offdiag = 0.0;
  double offdiag_tol = 0.0;
  int lie_dimension = 0;

  bool all_hold() const {
    return zero_trace && symmetric && offdiag_nonzero &&
           controllable != Controllability::kNo;
  }
};

/// Evaluates each standing hypothesis independently. offdiag_tol defaults to
/// 1e-12 * |mu|_F.
HypothesisReport CheckHypotheses(const QuantumSystem& sys,
                                 std::optional<double> offdiag_tol = {});

/// Reads a system document. JSON objects carry `n`, `h0`, `mu` (nested rows
/// or flat row-major arrays) and optional `label`. Any other input is read as
/// the compact CSV variant: `n`, then N rows of h0, then N rows of mu.
/// Throws ParseError on malformed input and ValidationError on hypothesis
/// violations.
QuantumSystem LoadSystem(std::istream& in);
QuantumSystem LoadSystemFile(const std::string& path);

/// Canonical JSON form: two-space indentation, one matrix row per line,
/// entries printed with 17 significant digits. LoadSystem(SaveSystem(s))
/// reproduces s bit for bit.
void SaveSystem(std::ostream& out, const QuantumSystem& sys);
std::string SaveSystemString(const QuantumSystem& sys);

/// Formats x with 17 significant digits.
std::string FormatReal(double x);

}  // namespace qcl
