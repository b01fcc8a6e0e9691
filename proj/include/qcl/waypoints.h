#pragma once

#include <array>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qcl/errors.h"
#include "qcl/matspace.h"

namespace qcl {

/// Where a way-point set came from. File and CLI spellings are
/// "theorem1" (dipole-adapted), "theorem3" (dipole-independent) and "custom".
enum class Provenance { kDipoleAdapted, kUniversal, kCustom };

std::string_view ToString(Provenance p);
/// Throws ParseError on an unknown spelling.
Provenance ParseProvenance(std::string_view s);

/// Position k = 1..4 inside the quadruple built for the pair (i, j).
struct PairLabel {
  int i = 0;
  int j = 0;
  int k = 0;
};

/// Swap-with-phase ('U') or reflection ('V') way-point at angle theta.
struct AngleLabel {
  char kind = 'U';
  double theta = 0.0;
  int i = 0;
  int j = 0;
};

using WaypointLabel = std::variant<std::monostate, PairLabel, AngleLabel>;

class WaypointSet {
 public:
  /// labels may be empty; otherwise one per unitary.
  WaypointSet(Provenance provenance, std::vector<UnitaryMatrix> unitaries,
              std::vector<WaypointLabel> labels = {});

  Provenance provenance() const { return provenance_; }
  int dim() const { return unitaries_.front().dim(); }
  int size() const { return static_cast<int>(unitaries_.size()); }
  const std::vector<UnitaryMatrix>& unitaries() const { return unitaries_; }
  const std::vector<WaypointLabel>& labels() const { return labels_; }

 private:
  Provenance provenance_;
  std::vector<UnitaryMatrix> unitaries_;
  std::vector<WaypointLabel> labels_;
};

/// Determinant of the 5x5 matrix with rows (1, cos t, sin t, cos 2t, sin 2t).
struct AngleGridCheck {
  double determinant = 0.0;
  bool pass = false;  ///< |determinant| > kAngleGridDetTol
};

inline constexpr double kAngleGridDetTol = 1e-6;

AngleGridCheck CheckAngleGrid(const std::array<double, 5>& angles);

/// Five angles on which a trigonometric polynomial of degree two that
/// vanishes must vanish identically.
class AngleGrid {
 public:
  /// Throws std::invalid_argument when CheckAngleGrid fails.
  explicit AngleGrid(const std::array<double, 5>& angles);

  const std::array<double, 5>& angles() const { return angles_; }

 private:
  std::array<double, 5> angles_;
};

/// {0, pi/3, pi/2, pi, 3pi/2}.
AngleGrid DefaultAngleGrid();

/// The 2N^2 - 2N dipole-adapted way-points.
///
/// With μ = Q Λ Q* (eigenvalues ascending), λ1 the smallest and λ2 the
/// largest eigenvalue, for each pair i < j the base unitary B = Q P places the
/// λ1 eigenvector in column i and the λ2 eigenvector in column j (remaining
/// eigenvectors fill the other columns in order). The quadruple is
///   B, B swap<i,j>, B R<i,j>, B C<i,j>
/// with R = [[1, 1], [-1, 1]]/sqrt2 and C = [[i, 1], [1, i]]/sqrt2, so the
/// <i,j> blocks of W* μ W are diag(λ1, λ2), diag(λ2, λ1),
/// ½[[λ1+λ2, λ1-λ2], [λ1-λ2, λ1+λ2]] and
/// ½[[λ1+λ2, (λ2-λ1)i], [(λ1-λ2)i, λ1+λ2]] while all other entries agree.
/// Throws std::invalid_argument for μ = 0.
WaypointSet DipoleWaypoints(const HermitianZT& mu);

struct DipoleBlockCheck {
  double max_block_error = 0.0;    ///< vs the four closed-form blocks
  double max_offblock_spread = 0.0;  ///< within each quadruple
};

/// Compares the conjugated dipoles of a dipole-adapted set with the closed
/// form <i,j> blocks.
DipoleBlockCheck CheckDipoleBlocks(const WaypointSet& set, const HermitianZT& mu);

/// The μ-independent way-points: for every i < j and angle t in the grid,
/// [[0, e^{it}], [e^{-it}, 0]]<i,j>; then for i = 1..n-1 and every t,
/// [[cos t, sin t], [sin t, -cos t]]<i,i+1>. 5 n(n-1)/2 + 5(n-1) elements.
WaypointSet UniversalWaypoints(int n, const AngleGrid& grid);

struct SeparationWitness {
  UnitaryMatrix unitary;
  double witness = 0.0;         ///< Tr(z U* μ U)
  std::vector<int> permutation;  ///< σ, 0-based: column k of V is e_σ(k)
  int attempts = 0;
};

/// A unitary U with |Tr(z U* μ U)| > 1e-10 |z| |μ|.
///
/// Diagonalizes z and μ with ascending spectra and tries U = Qμ V Qz* for
/// permutation matrices V: identity, reversal, then all others in
/// lexicographic order (N <= 6) or random permutations drawn from `rng`.
/// Throws std::invalid_argument for zero input and std::runtime_error if no
/// permutation separates (which indicates degenerate input).
SeparationWitness SeparatingUnitary(const HermitianZT& z, const HermitianZT& mu,
                                    std::mt19937_64& rng);

/// Way-point document: provenance, n, count and each unitary as rows of
/// [re, im] pairs, with optional labels.
void SaveWaypoints(std::ostream& out, const WaypointSet& set);
/// Throws ParseError on malformed input and ValidationError for non-unitary
/// entries.
WaypointSet LoadWaypoints(std::istream& in);
WaypointSet LoadWaypointsFile(const std::string& path);

/// Writes matrices in the way-point document layout under the given kind.
void WriteMatrixDocument(std::ostream& out, std::string_view kind,
                         const std::vector<CMatrix>& matrices);

}  // namespace qcl
