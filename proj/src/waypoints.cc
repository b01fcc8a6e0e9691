#include "qcl/waypoints.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "qcl/evolve.h"
#include "qcl/model.h"

namespace qcl {
namespace {

using nlohmann::json;

constexpr int kMaxExhaustiveDim = 6;
constexpr int kMaxRandomAttempts = 100000;

Block2 SwapBlock() {
  Block2 d;
  d << 0.0, 1.0, 1.0, 0.0;
  return d;
}

Block2 RotationBlock() {
  Block2 d;
  d << 1.0, 1.0, -1.0, 1.0;
  return d / std::sqrt(2.0);
}

Block2 PhaseBlock() {
  const Complex I(0.0, 1.0);
  Block2 d;
  d << I, 1.0, 1.0, I;
  return d / std::sqrt(2.0);
}

std::array<Block2, 4> ExpectedBlocks(double l1, double l2) {
  const Complex I(0.0, 1.0);
  std::array<Block2, 4> b;
  b[0] << l1, 0.0, 0.0, l2;
  b[1] << l2, 0.0, 0.0, l1;
  b[2] << l1 + l2, l1 - l2, l1 - l2, l1 + l2;
  b[2] *= 0.5;
  b[3] << l1 + l2, (l2 - l1) * I, (l1 - l2) * I, l1 + l2;
  b[3] *= 0.5;
  return b;
}

CMatrix MatrixFromJson(const json& node, int n) {
  if (!node.is_array() || node.size() != static_cast<size_t>(n)) {
    throw ParseError("way-point matrix must have " + std::to_string(n) + " rows");
  }
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = node[static_cast<size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<size_t>(n)) {
      throw ParseError("way-point matrix row must have " + std::to_string(n) +
                       " entries");
    }
    for (int j = 0; j < n; ++j) {
      const json& e = row[static_cast<size_t>(j)];
      if (e.is_number()) {
        m(i, j) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
                 e[1].is_number()) {
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError("way-point entry must be a number or [re, im]");
      }
    }
  }
  return m;
}

// Emits a complex matrix with one [re, im] row per line; doubles use the
// fixed 17-digit format so that output is byte-stable.
void WriteMatrix(std::ostream& out, const CMatrix& m, const char* indent) {
  out << "[\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << indent << "  [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ", ";
      out << "[" << FormatReal(m(i, j).real()) << ", "
          << FormatReal(m(i, j).imag()) << "]";
    }
    out << "]" << (i + 1 < m.rows() ? ",\n" : "\n");
  }
  out << indent << "]";
}

std::string LabelJson(const WaypointLabel& label) {
  if (const auto* p = std::get_if<PairLabel>(&label)) {
    return "{\"i\": " + std::to_string(p->i) + ", \"j\": " +
           std::to_string(p->j) + ", \"k\": " + std::to_string(p->k) + "}";
  }
  if (const auto* a = std::get_if<AngleLabel>(&label)) {
    return std::string("{\"kind\": \"") + a->kind + "\", \"theta\": " +
           FormatReal(a->theta) + ", \"i\": " + std::to_string(a->i) +
           ", \"j\": " + std::to_string(a->j) + "}";
  }
  return {};
}

WaypointLabel LabelFromJson(const json& node) {
  try {
    if (node.contains("k")) {
      return PairLabel{node.at("i").get<int>(), node.at("j").get<int>(),
                       node.at("k").get<int>()};
    }
    if (node.contains("kind")) {
      const std::string kind = node.at("kind").get<std::string>();
      if (kind != "U" && kind != "V") throw ParseError("label kind must be U or V");
      return AngleLabel{kind[0], node.at("theta").get<double>(),
                        node.at("i").get<int>(), node.at("j").get<int>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("way-point label: ") + e.what());
  }
  return std::monostate{};
}

}  // namespace

std::string_view ToString(Provenance p) {
  switch (p) {
    case Provenance::kDipoleAdapted:
      return "theorem1";
    case Provenance::kUniversal:
      return "theorem3";
    case Provenance::kCustom:
      return "custom";
  }
  return "custom";
}

Provenance ParseProvenance(std::string_view s) {
  if (s == "theorem1") return Provenance::kDipoleAdapted;
  if (s == "theorem3") return Provenance::kUniversal;
  if (s == "custom") return Provenance::kCustom;
  throw ParseError("unknown provenance '" + std::string(s) + "'");
}

WaypointSet::WaypointSet(Provenance provenance,
                         std::vector<UnitaryMatrix> unitaries,
                         std::vector<WaypointLabel> labels)
    : provenance_(provenance),
      unitaries_(std::move(unitaries)),
      labels_(std::move(labels)) {
  if (unitaries_.empty()) {
    throw std::invalid_argument("WaypointSet: empty");
  }
  for (const UnitaryMatrix& u : unitaries_) {
    if (u.dim() != unitaries_.front().dim()) {
      throw std::invalid_argument("WaypointSet: mixed dimensions");
    }
  }
  if (!labels_.empty() && labels_.size() != unitaries_.size()) {
    throw std::invalid_argument("WaypointSet: one label per way-point");
  }
}

AngleGridCheck CheckAngleGrid(const std::array<double, 5>& angles) {
  Eigen::Matrix<double, 5, 5> m;
  for (int k = 0; k < 5; ++k) {
    const double t = angles[static_cast<size_t>(k)];
    m.row(k) << 1.0, std::cos(t), std::sin(t), std::cos(2 * t), std::sin(2 * t);
  }
  AngleGridCheck check;
  check.determinant = m.fullPivLu().determinant();
  check.pass = std::abs(check.determinant) > kAngleGridDetTol;
  return check;
}

AngleGrid::AngleGrid(const std::array<double, 5>& angles) : angles_(angles) {
  const AngleGridCheck check = CheckAngleGrid(angles_);
  if (!check.pass) {
    throw std::invalid_argument("angle grid is singular (|det| = " +
                                FormatReal(std::abs(check.determinant)) + ")");
  }
}

AngleGrid DefaultAngleGrid() {
  using std::numbers::pi;
  return AngleGrid({0.0, pi / 3, pi / 2, pi, 3 * pi / 2});
}

WaypointSet DipoleWaypoints(const HermitianZT& mu) {
  const int n = mu.dim();
  if (mu.norm() <= 1e-14) {
    throw std::invalid_argument("dipole-adapted way-points need mu != 0");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mu.matrix());
  const CMatrix& q = es.eigenvectors();
  if (!(es.eigenvalues()(n - 1) > es.eigenvalues()(0))) {
    throw std::invalid_argument("dipole has a single eigenvalue");
  }
  const std::array<Block2, 3> factors = {SwapBlock(), RotationBlock(),
                                         PhaseBlock()};

  std::vector<UnitaryMatrix> us;
  std::vector<WaypointLabel> labels;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      // Column i <- lowest eigenvector, column j <- highest, others in order.
      CMatrix base(n, n);
      base.col(i - 1) = q.col(0);
      base.col(j - 1) = q.col(n - 1);
      int next = 1;
      for (int c = 0; c < n; ++c) {
        if (c == i - 1 || c == j - 1) continue;
        base.col(c) = q.col(next++);
      }
      us.emplace_back(base);
      labels.push_back(PairLabel{i, j, 1});
      for (int k = 0; k < 3; ++k) {
        us.emplace_back(base * Embed2x2(factors[static_cast<size_t>(k)], i, j, n));
        labels.push_back(PairLabel{i, j, k + 2});
      }
    }
  }
  WaypointSet set(Provenance::kDipoleAdapted, std::move(us), std::move(labels));

  const DipoleBlockCheck check = CheckDipoleBlocks(set, mu);
  const double scale = 1.0 + mu.norm();
  if (check.max_block_error > 1e-10 * scale ||
      check.max_offblock_spread > 1e-12 * scale) {
    throw std::logic_error("dipole-adapted way-points fail their block check");
  }
  return set;
}

DipoleBlockCheck CheckDipoleBlocks(const WaypointSet& set, const HermitianZT& mu) {
  if (set.dim() != mu.dim() || set.labels().size() != set.unitaries().size()) {
    throw std::invalid_argument("CheckDipoleBlocks: need a labelled set of matching size");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mu.matrix(), Eigen::EigenvaluesOnly);
  const double l1 = es.eigenvalues()(0);
  const double l2 = es.eigenvalues()(mu.dim() - 1);
  const auto expected = ExpectedBlocks(l1, l2);

  DipoleBlockCheck check;
  CMatrix first;
  for (int w = 0; w < set.size(); ++w) {
    const auto* label = std::get_if<PairLabel>(&set.labels()[static_cast<size_t>(w)]);
    if (!label || label->k < 1 || label->k > 4) {
      throw std::invalid_argument("CheckDipoleBlocks: set is not dipole-adapted");
    }
    const CMatrix hat =
        ConjugatedDipole(set.unitaries()[static_cast<size_t>(w)], mu).matrix();
    const Block2 block = Submatrix2x2(hat, label->i, label->j);
    check.max_block_error =
        std::max(check.max_block_error,
                 (block - expected[static_cast<size_t>(label->k - 1)]).cwiseAbs().maxCoeff());
    CMatrix off = hat;
    for (int idx : {label->i - 1, label->j - 1}) {
      for (int c = 0; c < hat.rows(); ++c) {
        off(idx, c) = 0.0;
        off(c, idx) = 0.0;
      }
    }
    if (label->k == 1) {
      first = off;
    } else {
      check.max_offblock_spread =
          std::max(check.max_offblock_spread, (off - first).cwiseAbs().maxCoeff());
    }
  }
  return check;
}

WaypointSet UniversalWaypoints(int n, const AngleGrid& grid) {
  if (n < 2) throw std::invalid_argument("UniversalWaypoints: n must be >= 2");
  std::vector<UnitaryMatrix> us;
  std::vector<WaypointLabel> labels;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      for (double t : grid.angles()) {
        Block2 d;
        d << 0.0, std::polar(1.0, t), std::polar(1.0, -t), 0.0;
        us.emplace_back(Embed2x2(d, i, j, n));
        labels.push_back(AngleLabel{'U', t, i, j});
      }
    }
  }
  for (int i = 1; i < n; ++i) {
    for (double t : grid.angles()) {
      Block2 d;
      d << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
      us.emplace_back(Embed2x2(d, i, i + 1, n));
      labels.push_back(AngleLabel{'V', t, i, i + 1});
    }
  }
  return WaypointSet(Provenance::kUniversal, std::move(us), std::move(labels));
}

SeparationWitness SeparatingUnitary(const HermitianZT& z, const HermitianZT& mu,
                                    std::mt19937_64& rng) {
  if (z.dim() != mu.dim()) {
    throw std::invalid_argument("SeparatingUnitary: dimension mismatch");
  }
  if (z.norm() == 0.0 || mu.norm() == 0.0) {
    throw std::invalid_argument("SeparatingUnitary: inputs must be nonzero");
  }
  const int n = z.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> ez(z.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> em(mu.matrix());
  const double threshold = 1e-10 * z.norm() * mu.norm();

  int attempts = 0;
  auto attempt = [&](const std::vector<int>& sigma) -> std::optional<SeparationWitness> {
    ++attempts;
    CMatrix v = CMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) v(sigma[static_cast<size_t>(k)], k) = 1.0;
    UnitaryMatrix u(em.eigenvectors() * v * ez.eigenvectors().adjoint());
    const double w =
        (z.matrix() * u.matrix().adjoint() * mu.matrix() * u.matrix()).trace().real();
    if (std::abs(w) > threshold) {
      return SeparationWitness{std::move(u), w, sigma, attempts};
    }
    return std::nullopt;
  };

  std::vector<int> identity(static_cast<size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<int> reversed(identity.rbegin(), identity.rend());
  for (const auto& sigma : {identity, reversed}) {
    if (auto found = attempt(sigma)) return *std::move(found);
  }
  if (n <= kMaxExhaustiveDim) {
    std::vector<int> sigma = identity;
    while (std::next_permutation(sigma.begin(), sigma.end())) {
      if (sigma == reversed) continue;
      if (auto found = attempt(sigma)) return *std::move(found);
    }
  } else {
    std::vector<int> sigma = identity;
    for (int r = 0; r < kMaxRandomAttempts; ++r) {
      std::shuffle(sigma.begin(), sigma.end(), rng);
      if (auto found = attempt(sigma)) return *std::move(found);
    }
  }
  throw std::runtime_error("SeparatingUnitary: no separating permutation found");
}

void WriteMatrixDocument(std::ostream& out, std::string_view kind,
                         const std::vector<CMatrix>& matrices) {
  const long n = matrices.empty() ? 0 : static_cast<long>(matrices.front().rows());
  out << "{\n  \"provenance\": \"" << kind << "\",\n  \"n\": " << n
      << ",\n  \"count\": " << matrices.size() << ",\n  \"waypoints\": [";
  for (size_t w = 0; w < matrices.size(); ++w) {
    out << (w ? ",\n" : "\n") << "    {\"matrix\": ";
    WriteMatrix(out, matrices[w], "    ");
    out << "}";
  }
  out << "\n  ]\n}\n";
}

void SaveWaypoints(std::ostream& out, const WaypointSet& set) {
  out << "{\n  \"provenance\": \"" << ToString(set.provenance())
      << "\",\n  \"n\": " << set.dim() << ",\n  \"count\": " << set.size()
      << ",\n  \"waypoints\": [";
  for (int w = 0; w < set.size(); ++w) {
    out << (w ? ",\n" : "\n") << "    {";
    if (!set.labels().empty()) {
      const std::string label = LabelJson(set.labels()[static_cast<size_t>(w)]);
      if (!label.empty()) out << "\"label\": " << label << ", ";
    }
    out << "\"matrix\": ";
    WriteMatrix(out, set.unitaries()[static_cast<size_t>(w)].matrix(), "    ");
    out << "}";
  }
  out << "\n  ]\n}\n";
}

WaypointSet LoadWaypoints(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("way-point document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("waypoints") ||
      !doc["n"].is_number_integer() || !doc["waypoints"].is_array()) {
    throw ParseError("way-point document needs integer 'n' and array 'waypoints'");
  }
  const int n = doc["n"].get<int>();
  if (n < 1) throw ParseError("way-point document: n must be positive");
  Provenance provenance = Provenance::kCustom;
  if (doc.contains("provenance")) {
    if (!doc["provenance"].is_string()) throw ParseError("provenance must be a string");
    provenance = ParseProvenance(doc["provenance"].get<std::string>());
  }
  const json& items = doc["waypoints"];
  if (items.empty()) throw ParseError("way-point document: no way-points");
  if (doc.contains("count") &&
      (!doc["count"].is_number_integer() ||
       doc["count"].get<size_t>() != items.size())) {
    throw ParseError("way-point document: count does not match");
  }
  std::vector<UnitaryMatrix> us;
  std::vector<WaypointLabel> labels;
  bool any_label = false;
  for (size_t w = 0; w < items.size(); ++w) {
    const json& item = items[w];
    const json& matrix = item.is_object() && item.contains("matrix") ? item["matrix"] : item;
    CMatrix m = MatrixFromJson(matrix, n);
    try {
      us.emplace_back(std::move(m));
    } catch (const std::invalid_argument& e) {
      throw ValidationError("way-point " + std::to_string(w + 1) + ": " + e.what());
    }
    if (item.is_object() && item.contains("label")) {
      labels.push_back(LabelFromJson(item["label"]));
      any_label = true;
    } else {
      labels.emplace_back(std::monostate{});
    }
  }
  if (!any_label) labels.clear();
  return WaypointSet(provenance, std::move(us), std::move(labels));
}

WaypointSet LoadWaypointsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open way-point file: " + path);
  return LoadWaypoints(in);
}

}  // namespace qcl
