#include "qcl/model.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qcl/reachability.h"

namespace qcl {
namespace {

using nlohmann::json;

std::string Entry(const char* name, Eigen::Index i, Eigen::Index j) {
  std::ostringstream s;
  s << name << "(" << i + 1 << "," << j + 1 << ")";
  return s.str();
}

double MinOffDiagonal(const RealMatrix& mu) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    for (Eigen::Index j = 0; j < mu.cols(); ++j) {
      if (i != j) best = std::min(best, std::abs(mu(i, j)));
    }
  }
  return best;
}

RealMatrix MatrixFromJson(const json& node, int n, const char* name) {
  RealMatrix m(n, n);
  if (!node.is_array()) {
    throw ParseError(std::string("field '") + name + "' must be an array");
  }
  auto number = [&](const json& v) {
    if (!v.is_number()) {
      throw ParseError(std::string("field '") + name +
                       "' contains a non-numeric entry");
    }
    return v.get<double>();
  };
  if (node.size() == static_cast<size_t>(n) * n &&
      (node.empty() || !node.front().is_array())) {
    for (int k = 0; k < n * n; ++k) m(k / n, k % n) = number(node[k]);
    return m;
  }
  if (node.size() != static_cast<size_t>(n)) {
    throw ParseError(std::string("field '") + name + "' must have " +
                     std::to_string(n) + " rows");
  }
  for (int i = 0; i < n; ++i) {
    const json& row = node[i];
    if (!row.is_array() || row.size() != static_cast<size_t>(n)) {
      throw ParseError(std::string("field '") + name + "' row " +
                       std::to_string(i + 1) + " must have " +
                       std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) m(i, j) = number(row[j]);
  }
  return m;
}

QuantumSystem LoadJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("system document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("h0") ||
      !doc.contains("mu")) {
    throw ParseError("system document needs fields 'n', 'h0' and 'mu'");
  }
  if (!doc["n"].is_number_integer() || doc["n"].get<int>() < 1) {
    throw ParseError("field 'n' must be a positive integer");
  }
  const int n = doc["n"].get<int>();
  std::string label;
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw ParseError("field 'label' must be a string");
    label = doc["label"].get<std::string>();
  }
  return QuantumSystem::Create(MatrixFromJson(doc["h0"], n, "h0"),
                               MatrixFromJson(doc["mu"], n, "mu"),
                               std::move(label));
}

std::vector<double> SplitNumbers(const std::string& line, int lineno) {
  std::vector<double> out;
  std::string cell;
  std::string normalized = line;
  for (char& c : normalized) {
    if (c == ',' || c == ';' || c == '\t') c = ' ';
  }
  std::istringstream s(normalized);
  while (s >> cell) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size()) {
      throw ParseError("CSV line " + std::to_string(lineno) +
                       ": not a number: '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

QuantumSystem LoadCsv(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto values = SplitNumbers(line, lineno);
    if (!values.empty()) rows.push_back(std::move(values));
  }
  if (rows.empty() || rows[0].size() != 1) {
    throw ParseError("CSV system: first line must hold the dimension n");
  }
  const double nd = rows[0][0];
  if (nd < 1 || nd != std::floor(nd)) {
    throw ParseError("CSV system: n must be a positive integer");
  }
  const int n = static_cast<int>(nd);
  if (rows.size() != static_cast<size_t>(2 * n + 1)) {
    throw ParseError("CSV system: expected " + std::to_string(2 * n) +
                     " matrix rows after n");
  }
  RealMatrix h0(n, n);
  RealMatrix mu(n, n);
  for (int i = 0; i < 2 * n; ++i) {
    const auto& r = rows[static_cast<size_t>(i + 1)];
    if (r.size() != static_cast<size_t>(n)) {
      throw ParseError("CSV system: matrix row " + std::to_string(i + 1) +
                       " must have " + std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) (i < n ? h0(i, j) : mu(i - n, j)) = r[j];
  }
  return QuantumSystem::Create(std::move(h0), std::move(mu));
}

void WriteMatrix(std::ostream& out, const RealMatrix& m) {
  out << "[\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "    [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ", ";
      out << FormatReal(m(i, j));
    }
    out << "]" << (i + 1 < m.rows() ? ",\n" : "\n");
  }
  out << "  ]";
}

}  // namespace

std::string_view ToString(Controllability c) {
  switch (c) {
    case Controllability::kSU:
      return "SU";
    case Controllability::kU:
      return "U";
    case Controllability::kNo:
      return "NO";
  }
  return "NO";
}

std::string FormatReal(double x) {
  char buf[40];
  // Canonical zero: "-0" would not survive a JSON reload as a double.
  std::snprintf(buf, sizeof(buf), "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

QuantumSystem QuantumSystem::Create(RealMatrix h0, RealMatrix mu,
                                    std::string label) {
  if (h0.rows() != h0.cols() || mu.rows() != mu.cols()) {
    throw ValidationError("h0 and mu must be square");
  }
  if (h0.rows() != mu.rows()) {
    throw ValidationError("h0 and mu dimensions differ");
  }
  if (h0.rows() < 2) {
    throw ValidationError("system dimension must be at least 2");
  }
  for (Eigen::Index i = 0; i < h0.rows(); ++i) {
    for (Eigen::Index j = 0; j < h0.cols(); ++j) {
      if (!std::isfinite(h0(i, j))) {
        throw ValidationError(Entry("h0", i, j) + " is not finite");
      }
      if (!std::isfinite(mu(i, j))) {
        throw ValidationError(Entry("mu", i, j) + " is not finite");
      }
    }
  }
  for (Eigen::Index i = 0; i < h0.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < h0.cols(); ++j) {
      if (std::abs(h0(i, j) - h0(j, i)) > kHermitianTol) {
        throw ValidationError("h0 not symmetric: " + Entry("h0", i, j) +
                              " = " + FormatReal(h0(i, j)) + " but " +
                              Entry("h0", j, i) + " = " + FormatReal(h0(j, i)));
      }
      if (std::abs(mu(i, j) - mu(j, i)) > kHermitianTol) {
        throw ValidationError("mu not symmetric: " + Entry("mu", i, j) +
                              " = " + FormatReal(mu(i, j)) + " but " +
                              Entry("mu", j, i) + " = " + FormatReal(mu(j, i)));
      }
    }
  }
  const double tr = mu.trace();
  if (std::abs(tr) >= kHermitianTol * (1.0 + mu.norm())) {
    throw ValidationError("Tr(mu) != 0: dipole must be traceless (trace = " +
                          FormatReal(tr) + ")");
  }
  return QuantumSystem(std::move(h0), std::move(mu), std::move(label));
}

HermitianZT QuantumSystem::mu_zt() const {
  return HermitianZT::Project(mu_.cast<Complex>());
}

HypothesisReport CheckHypotheses(const QuantumSystem& sys,
                                 std::optional<double> offdiag_tol) {
  HypothesisReport r;
  const RealMatrix& mu = sys.mu();
  r.trace = mu.trace();
  r.zero_trace = std::abs(r.trace) < kHermitianTol * (1.0 + mu.norm());
  r.symmetric = (sys.h0() - sys.h0().transpose()).cwiseAbs().maxCoeff() <=
                    kHermitianTol &&
                (mu - mu.transpose()).cwiseAbs().maxCoeff() <= kHermitianTol;
  r.offdiag_tol = offdiag_tol.value_or(1e-12 * mu.norm());
  r.min_offdiag = MinOffDiagonal(mu);
  r.offdiag_nonzero = r.min_offdiag > r.offdiag_tol;
  const LieClosureResult closure = LieClosure(sys.h0(), sys.mu());
  r.controllable = closure.verdict;
  r.lie_dimension = closure.dimension;
  return r;
}

QuantumSystem LoadSystem(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    throw ParseError("system document is empty");
  }
  if (text[first] == '{') return LoadJson(text);
  return LoadCsv(text);
}

QuantumSystem LoadSystemFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file: " + path);
  return LoadSystem(in);
}

void SaveSystem(std::ostream& out, const QuantumSystem& sys) {
  out << "{\n  \"n\": " << sys.dim() << ",\n";
  if (!sys.label().empty()) {
    out << "  \"label\": " << nlohmann::json(sys.label()).dump() << ",\n";
  }
  out << "  \"h0\": ";
  WriteMatrix(out, sys.h0());
  out << ",\n  \"mu\": ";
  WriteMatrix(out, sys.mu());
  out << "\n}\n";
}

std::string SaveSystemString(const QuantumSystem& sys) {
  std::ostringstream s;
  SaveSystem(s, sys);
  return s.str();
}

}  // namespace qcl
