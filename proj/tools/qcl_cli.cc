// qcl: batch verification of way-point conditions for bilinear quantum
// control. Exit codes: 0 pass, 1 verdict failure or non-convergence,
// 2 usage or parse error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcl/errors.h"
#include "qcl/evolve.h"
#include "qcl/landscape.h"
#include "qcl/matspace.h"
#include "qcl/model.h"
#include "qcl/reachability.h"
#include "qcl/steer.h"
#include "qcl/waypoints.h"

namespace fs = std::filesystem;

namespace {

using namespace qcl;

constexpr int kPass = 0;
constexpr int kVerdictFail = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> systems;
  std::string field;
  std::string out;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::string provenance;
  int jobs = 1;
  int n = 0;
  std::string rho0;
  std::string obs;
  std::string waypoints;
  std::vector<double> angles;
  bool trajectory = false;
  bool basis = false;
  int stride = 1;
  double fd_step = 1e-5;
  SteerOptions steer;
};

std::string Fmt(double x) { return FormatReal(x); }

std::string Short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

void EnsureOutDir(const Options& o) {
  if (o.out.empty()) return;
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw UsageError("cannot create output directory " + o.out + ": " + ec.message());
}

std::ofstream OpenOut(const Options& o, const std::string& name) {
  std::ofstream f(fs::path(o.out) / name, std::ios::binary);
  if (!f) throw UsageError("cannot write " + (fs::path(o.out) / name).string());
  return f;
}

const std::string& SingleSystem(const Options& o) {
  if (o.systems.size() != 1) throw UsageError("exactly one --system file is required");
  return o.systems.front();
}

// Reads an N x N complex matrix: a bare nested array, or an object with a
// "matrix" field. Entries are reals or [re, im] pairs.
CMatrix LoadComplexMatrix(const std::string& path, int n, const char* what) {
  std::ifstream in(path);
  if (!in) throw ParseError(std::string("cannot open ") + what + " file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + " document: " + e.what());
  }
  const nlohmann::json& rows = doc.is_object() && doc.contains("matrix") ? doc["matrix"] : doc;
  if (!rows.is_array()) throw ParseError(std::string(what) + ": expected a matrix");
  const int size = static_cast<int>(rows.size());
  if (size != n) {
    throw UsageError(std::string(what) + " has dimension " + std::to_string(size) +
                     " but the system has N = " + std::to_string(n));
  }
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw UsageError(std::string(what) + " row " + std::to_string(i + 1) +
                       " does not have N = " + std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) {
      const auto& e = row[static_cast<size_t>(j)];
      if (e.is_number()) {
        m(i, j) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError(std::string(what) + ": entry (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ") is not a number or [re, im] pair");
      }
    }
  }
  return m;
}

void PrintSpan(std::ostream& out, const SpanReport& r) {
  const int target = r.dim * r.dim - 1;
  out << "span rank " << r.rank << " / " << target << " (sigma_min/sigma_max = "
      << Short(r.min_ratio) << "): " << (r.full ? "FULL" : "DEFICIENT") << "\n";
}

// ---------------------------------------------------------------- validate

int ValidateOne(const std::string& path, const Options& o, std::ostream& out,
                const std::string& report_name) {
  out << "system " << path << "\n";
  std::optional<QuantumSystem> sys;
  try {
    sys = LoadSystemFile(path);
  } catch (const ValidationError& e) {
    out << "  FAIL " << e.what() << "\n";
    return kVerdictFail;
  }
  const HypothesisReport r = CheckHypotheses(*sys, o.tol);
  auto mark = [](bool ok) { return ok ? "ok  " : "FAIL"; };
  out << "  " << mark(r.zero_trace) << " Tr(mu) = 0            (trace = " << Short(r.trace) << ")\n"
      << "  " << mark(r.symmetric) << " h0, mu real symmetric\n"
      << "  " << mark(r.offdiag_nonzero) << " mu_ij != 0 for i != j  (min |mu_ij| = "
      << Short(r.min_offdiag) << ", tol = " << Short(r.offdiag_tol) << ")\n"
      << "  " << mark(r.controllable != Controllability::kNo)
      << " controllable           (Lie dimension " << r.lie_dimension << ", "
      << ToString(r.controllable) << ")\n"
      << "  verdict: " << (r.all_hold() ? "PASS" : "FAIL") << "\n";
  if (!o.out.empty()) {
    std::ofstream f = OpenOut(o, report_name);
    f << "{\n  \"system\": " << nlohmann::json(path).dump() << ",\n"
      << "  \"n\": " << sys->dim() << ",\n"
      << "  \"zero_trace\": " << (r.zero_trace ? "true" : "false") << ",\n"
      << "  \"trace\": " << Fmt(r.trace) << ",\n"
      << "  \"symmetric\": " << (r.symmetric ? "true" : "false") << ",\n"
      << "  \"offdiag_nonzero\": " << (r.offdiag_nonzero ? "true" : "false") << ",\n"
      << "  \"min_offdiag\": " << Fmt(r.min_offdiag) << ",\n"
      << "  \"offdiag_tol\": " << Fmt(r.offdiag_tol) << ",\n"
      << "  \"controllability\": \"" << ToString(r.controllable) << "\",\n"
      << "  \"lie_dimension\": " << r.lie_dimension << ",\n"
      << "  \"pass\": " << (r.all_hold() ? "true" : "false") << "\n}\n";
  }
  return r.all_hold() ? kPass : kVerdictFail;
}

// ---------------------------------------------------------- controllability

void WriteBasisCsv(std::ostream& f, const std::vector<CMatrix>& basis) {
  if (basis.empty()) return;
  const Eigen::Index n = basis.front().rows();
  f << "index";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      f << ",re_" << i + 1 << "_" << j + 1 << ",im_" << i + 1 << "_" << j + 1;
    }
  }
  f << "\n";
  for (size_t k = 0; k < basis.size(); ++k) {
    f << k;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        f << "," << Fmt(basis[k](i, j).real()) << "," << Fmt(basis[k](i, j).imag());
      }
    }
    f << "\n";
  }
}

int ControllabilityOne(const std::string& path, const Options& o, std::ostream& out,
                       const std::string& basis_name) {
  const QuantumSystem sys = LoadSystemFile(path);
  const LieClosureResult r = LieClosure(sys.h0(), sys.mu());
  out << "system " << path << "\n  N = " << sys.dim() << ", Lie dimension " << r.dimension
      << " (su(N): " << sys.dim() * sys.dim() - 1 << ", u(N): " << sys.dim() * sys.dim()
      << ")\n  verdict: " << ToString(r.verdict) << "\n";
  if (!o.out.empty() && o.basis) {
    std::ofstream f = OpenOut(o, basis_name);
    WriteBasisCsv(f, r.basis);
  }
  return r.verdict == Controllability::kNo ? kVerdictFail : kPass;
}

int RunOne(int (*fn)(const std::string&, const Options&, std::ostream&, const std::string&),
           const std::string& path, const Options& o, std::ostream& out,
           const std::string& name) {
  try {
    return fn(path, o, out, name);
  } catch (const ParseError& e) {
    out << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    out << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    out << "error: " << e.what() << "\n";
    return kVerdictFail;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kUsage;
  }
}

// Runs fn over every --system file, up to --jobs at a time. Each job owns its
// output buffer; buffers are printed in argument order so the transcript does
// not depend on scheduling. The exit code is the worst per-file code.
int ForEachSystem(const Options& o,
                  int (*fn)(const std::string&, const Options&, std::ostream&,
                            const std::string&),
                  const std::string& single_name, const std::string& suffix) {
  if (o.systems.empty()) throw UsageError("--system is required");
  EnsureOutDir(o);
  const size_t count = o.systems.size();
  std::vector<std::ostringstream> logs(count);
  std::vector<int> codes(count, kPass);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < count; k = next++) {
      const std::string name =
          count == 1 ? single_name : fs::path(o.systems[k]).stem().string() + suffix;
      codes[k] = RunOne(fn, o.systems[k], o, logs[k], name);
    }
  };
  const int threads = std::max(1, std::min<int>(o.jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int worst = kPass;
  for (size_t k = 0; k < count; ++k) {
    (codes[k] == kUsage ? std::cerr : std::cout) << logs[k].str();
    worst = std::max(worst, codes[k]);
  }
  return worst;
}

// ---------------------------------------------------------------- waypoints

AngleGrid GridFrom(const Options& o) {
  if (o.angles.empty()) return DefaultAngleGrid();
  if (o.angles.size() != 5) throw UsageError("--angles takes exactly five values");
  std::array<double, 5> a{};
  std::copy(o.angles.begin(), o.angles.end(), a.begin());
  const AngleGridCheck check = CheckAngleGrid(a);
  if (!check.pass) {
    throw UsageError("angle grid is singular (|det| = " + Short(std::abs(check.determinant)) +
                     ")");
  }
  return AngleGrid(a);
}

WaypointSet BuildSet(const Options& o, const std::optional<QuantumSystem>& sys, int n) {
  if (o.provenance == "theorem1") {
    if (!sys) throw UsageError("--provenance theorem1 needs --system");
    return DipoleWaypoints(sys->mu_zt());
  }
  if (o.provenance == "theorem3") return UniversalWaypoints(n, GridFrom(o));
  throw UsageError("--provenance must be theorem1 or theorem3");
}

SpanReport SetSpan(const WaypointSet& set, const HermitianZT& mu, const Options& o) {
  std::vector<HermitianZT> conj;
  conj.reserve(static_cast<size_t>(set.size()));
  for (const UnitaryMatrix& w : set.unitaries()) conj.push_back(ConjugatedDipole(w, mu));
  return SpanningRank(conj, o.tol.value_or(kRankTol));
}

int CmdWaypoints(const Options& o) {
  if (o.systems.size() > 1) throw UsageError("waypoints takes a single --system");
  std::optional<QuantumSystem> sys;
  if (!o.systems.empty()) sys = LoadSystemFile(o.systems.front());
  int n = o.n;
  if (sys) {
    if (n != 0 && n != sys->dim()) {
      throw UsageError("--n " + std::to_string(n) + " disagrees with the system dimension " +
                       std::to_string(sys->dim()));
    }
    n = sys->dim();
  }
  if (n < 2) throw UsageError("need --system or --n >= 2");
  EnsureOutDir(o);
  const WaypointSet set = BuildSet(o, sys, n);
  std::cout << "provenance " << o.provenance << ", N = " << n << ", " << set.size()
            << " way-points\n";
  if (!o.out.empty()) {
    std::ofstream f = OpenOut(o, "waypoints.json");
    SaveWaypoints(f, set);
  }
  if (!sys) {
    std::cout << "no system given: set emitted without a spanning verdict\n";
    return kPass;
  }
  const SpanReport span = SetSpan(set, sys->mu_zt(), o);
  PrintSpan(std::cout, span);
  if (!o.out.empty()) {
    std::ofstream f = OpenOut(o, "span.csv");
    WriteSpanReport(f, span);
  }
  return span.full ? kPass : kVerdictFail;
}

// ------------------------------------------------------ propagate and check

struct Loaded {
  QuantumSystem sys;
  ControlField field;
};

Loaded LoadSystemAndField(const Options& o) {
  QuantumSystem sys = LoadSystemFile(SingleSystem(o));
  if (o.field.empty()) throw UsageError("--field is required");
  return {std::move(sys), LoadFieldFile(o.field)};
}

void WriteTrajectoryIfRequested(const Options& o, const PropagatorTrajectory& traj) {
  if (!o.trajectory) return;
  if (o.out.empty()) throw UsageError("--trajectory needs --out");
  std::ofstream f = OpenOut(o, "trajectory.csv");
  WriteTrajectoryCsv(f, traj);
}

int CmdPropagate(const Options& o) {
  const Loaded in = LoadSystemAndField(o);
  EnsureOutDir(o);
  const PropagatorTrajectory traj = Propagate(in.sys, in.field);
  double worst = 0.0;
  for (const UnitaryMatrix& u : traj.unitaries()) worst = std::max(worst, UnitarityDefect(u.matrix()));
  std::cout << "N = " << in.sys.dim() << ", M = " << in.field.steps()
            << ", T = " << Short(in.field.horizon()) << "\n"
            << "max |U*U - I|_F over the trajectory: " << Short(worst) << "\n"
            << "U(T) =\n";
  const CMatrix& u = traj.final().matrix();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    std::cout << " ";
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      std::cout << "  " << Short(u(i, j).real()) << (u(i, j).imag() < 0 ? "-" : "+")
                << Short(std::abs(u(i, j).imag())) << "i";
    }
    std::cout << "\n";
  }
  WriteTrajectoryIfRequested(o, traj);
  return kPass;
}

std::optional<std::pair<DensityMatrix, CMatrix>> LoadStateAndObservable(const Options& o,
                                                                        int n) {
  if (o.rho0.empty() && o.obs.empty()) return std::nullopt;
  if (o.rho0.empty() || o.obs.empty()) throw UsageError("--rho0 and --obs go together");
  DensityMatrix rho0(LoadComplexMatrix(o.rho0, n, "rho0"));
  CMatrix obs = LoadComplexMatrix(o.obs, n, "observable");
  if ((obs - obs.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw UsageError("observable is not Hermitian");
  }
  return std::make_pair(std::move(rho0), std::move(obs));
}

int CmdCheck(const Options& o) {
  const Loaded in = LoadSystemAndField(o);
  const auto state = LoadStateAndObservable(o, in.sys.dim());
  if (o.stride < 1) throw UsageError("--stride must be >= 1");
  EnsureOutDir(o);
  const PropagatorTrajectory traj = Propagate(in.sys, in.field);
  std::vector<HermitianZT> samples;
  for (int k = 0; k < traj.size(); k += o.stride) samples.push_back(traj.dipoles()[static_cast<size_t>(k)]);
  const SpanReport span = SpanningRank(samples, o.tol.value_or(kRankTol));
  std::cout << "N = " << in.sys.dim() << ", M = " << in.field.steps() << ", "
            << samples.size() << " sampled nodes\n";
  PrintSpan(std::cout, span);
  if (!o.out.empty()) {
    std::ofstream f = OpenOut(o, "span.csv");
    WriteSpanReport(f, span);
  }
  if (state) {
    const auto& [rho0, obs] = *state;
    const GradientVector g = Gradient(in.sys, in.field, rho0, obs);
    const double residual = KinematicResidual(traj.final(), rho0, obs);
    std::cout << "<O>(T) = " << Short(Objective(in.sys, in.field, rho0, obs)) << "\n"
              << "|gradient|_max = " << Short(g.cwiseAbs().maxCoeff()) << "\n"
              << "kinematic residual |[U* O U, rho0]|_F = " << Short(residual) << "\n";
    if (!o.out.empty()) {
      std::ofstream f = OpenOut(o, "gradient.csv");
      f << "m,t,gradient\n";
      for (int m = 0; m < g.size(); ++m) f << m << "," << Fmt(in.field.time(m)) << "," << Fmt(g(m)) << "\n";
    }
  }
  WriteTrajectoryIfRequested(o, traj);
  return span.full ? kPass : kVerdictFail;
}

int CmdGradientCheck(const Options& o) {
  const Loaded in = LoadSystemAndField(o);
  const auto state = LoadStateAndObservable(o, in.sys.dim());
  if (!state) throw UsageError("gradient-check needs --rho0 and --obs");
  const auto& [rho0, obs] = *state;
  const double tol = o.tol.value_or(1e-5);
  const GradientVector g = Gradient(in.sys, in.field, rho0, obs);
  GradientVector fd(g.size());
  for (int m = 0; m < in.field.steps(); ++m) {
    std::vector<double> plus = in.field.values();
    std::vector<double> minus = in.field.values();
    plus[static_cast<size_t>(m)] += o.fd_step;
    minus[static_cast<size_t>(m)] -= o.fd_step;
    fd(m) = (Objective(in.sys, ControlField(in.field.horizon(), plus), rho0, obs) -
             Objective(in.sys, ControlField(in.field.horizon(), minus), rho0, obs)) /
            (2 * o.fd_step);
  }
  const double scale = g.cwiseAbs().maxCoeff();
  const double err = (g - fd).cwiseAbs().maxCoeff();
  const double rel = scale > 0 ? err / scale : err;
  std::cout << "M = " << g.size() << ", h = " << Short(o.fd_step) << "\n"
            << "max |analytic - central difference| = " << Short(err) << "\n"
            << "relative (to |analytic|_max = " << Short(scale) << "): " << Short(rel)
            << "\nverdict: " << (rel < tol ? "PASS" : "FAIL") << " (tol " << Short(tol)
            << ")\n";
  return rel < tol ? kPass : kVerdictFail;
}

// -------------------------------------------------------------------- steer

int CmdSteer(const Options& o) {
  const QuantumSystem sys = LoadSystemFile(SingleSystem(o));
  std::optional<WaypointSet> set;
  if (!o.waypoints.empty()) {
    if (!o.provenance.empty()) throw UsageError("use either --waypoints or --provenance");
    set = LoadWaypointsFile(o.waypoints);
    if (set->dim() != sys.dim()) {
      throw UsageError("way-point dimension " + std::to_string(set->dim()) +
                       " does not match the system dimension " + std::to_string(sys.dim()));
    }
  } else {
    set = BuildSet(o, sys, sys.dim());
  }
  EnsureOutDir(o);
  const WaypointSynthesis r = SynthesizeThroughWaypoints(sys, *set, o.steer);
  for (size_t k = 0; k < r.segments.size(); ++k) {
    const SynthesisResult& s = r.segments[k];
    std::cout << "segment " << k << ": fidelity " << Short(s.achieved_fidelity) << " after "
              << s.iterations << " iterations" << (s.converged ? "" : " (not converged)")
              << "\n";
  }
  int visited = 0;
  for (const WaypointVisit& v : r.visits) visited += v.visited ? 1 : 0;
  std::cout << "visited " << visited << " / " << r.visits.size() << " way-points (target "
            << Short(o.steer.fid_target) << ")\n";
  PrintSpan(std::cout, r.span);
  if (!o.out.empty()) {
    {
      std::ofstream f = OpenOut(o, "field.json");
      SaveField(f, r.field);
    }
    {
      std::ofstream f = OpenOut(o, "visits.csv");
      f << "waypoint,fidelity,time,node,visited\n";
      for (const WaypointVisit& v : r.visits) {
        f << v.waypoint << "," << Fmt(v.fidelity) << "," << Fmt(v.time) << "," << v.node << ","
          << (v.visited ? 1 : 0) << "\n";
      }
    }
    {
      std::ofstream f = OpenOut(o, "span.csv");
      WriteSpanReport(f, r.span);
    }
    {
      std::ofstream f = OpenOut(o, "waypoints.json");
      SaveWaypoints(f, *set);
    }
  }
  WriteTrajectoryIfRequested(o, r.trajectory);
  return r.all_visited && r.span.full ? kPass : kVerdictFail;
}

// --------------------------------------------------------------------- main

int Dispatch(const std::string& cmd, const Options& o) {
  if (cmd == "validate") return ForEachSystem(o, ValidateOne, "report.json", ".report.json");
  if (cmd == "controllability") {
    return ForEachSystem(o, ControllabilityOne, "basis.csv", ".basis.csv");
  }
  if (cmd == "waypoints") return CmdWaypoints(o);
  if (cmd == "propagate") return CmdPropagate(o);
  if (cmd == "check") return CmdCheck(o);
  if (cmd == "gradient-check") return CmdGradientCheck(o);
  if (cmd == "steer") return CmdSteer(o);
  throw UsageError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Way-point verification for bilinear quantum control"};
  app.require_subcommand(1);
  Options o;

  auto add_system = [&](CLI::App* c, bool many) {
    auto* opt = c->add_option("--system", o.systems, many ? "System file(s), JSON or CSV"
                                                          : "System file, JSON or CSV");
    if (!many) opt->expected(1);
    opt->check(CLI::ExistingFile);
    return opt;
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory"); };
  auto add_field = [&](CLI::App* c) {
    c->add_option("--field", o.field, "Control field file")->required()->check(CLI::ExistingFile);
  };
  auto add_state = [&](CLI::App* c) {
    c->add_option("--rho0", o.rho0, "Initial density matrix file")->check(CLI::ExistingFile);
    c->add_option("--obs", o.obs, "Observable file")->check(CLI::ExistingFile);
  };
  auto add_provenance = [&](CLI::App* c) {
    c->add_option("--provenance", o.provenance, "Way-point construction")
        ->check(CLI::IsMember({"theorem1", "theorem3"}));
  };

  auto* validate = app.add_subcommand("validate", "Check the system hypotheses");
  add_system(validate, true)->required();
  add_out(validate);
  validate->add_option("--tol", o.tol, "Off-diagonal coupling threshold");
  validate->add_option("--jobs", o.jobs, "Parallel jobs over system files")->check(CLI::PositiveNumber);

  auto* ctrl = app.add_subcommand("controllability", "Lie-algebra rank test");
  add_system(ctrl, true)->required();
  add_out(ctrl);
  ctrl->add_flag("--basis", o.basis, "Write the closure basis to basis.csv");
  ctrl->add_option("--jobs", o.jobs, "Parallel jobs over system files")->check(CLI::PositiveNumber);

  auto* wp = app.add_subcommand("waypoints", "Build a way-point set and its span verdict");
  add_system(wp, false);
  add_out(wp);
  add_provenance(wp);
  wp->get_option("--provenance")->required();
  wp->add_option("--n", o.n, "Dimension when no system is given")->check(CLI::PositiveNumber);
  wp->add_option("--angles", o.angles, "Five angles for the universal set")->expected(5);
  wp->add_option("--tol", o.tol, "Relative singular value threshold");

  auto* prop = app.add_subcommand("propagate", "Propagate a control field");
  add_system(prop, false)->required();
  add_field(prop);
  add_out(prop);
  prop->add_flag("--trajectory", o.trajectory, "Write trajectory.csv");

  auto* check = app.add_subcommand("check", "Trajectory independence and landscape report");
  add_system(check, false)->required();
  add_field(check);
  add_out(check);
  add_state(check);
  check->add_option("--tol", o.tol, "Relative singular value threshold");
  check->add_option("--stride", o.stride, "Use every k-th trajectory node");
  check->add_flag("--trajectory", o.trajectory, "Write trajectory.csv");

  auto* grad = app.add_subcommand("gradient-check", "Analytic gradient vs central differences");
  add_system(grad, false)->required();
  add_field(grad);
  add_state(grad);
  grad->get_option("--rho0")->required();
  grad->get_option("--obs")->required();
  grad->add_option("--fd-step", o.fd_step, "Finite-difference step")->check(CLI::PositiveNumber);
  grad->add_option("--tol", o.tol, "Relative error threshold (default 1e-5)");

  auto* steer = app.add_subcommand("steer", "Synthesize a field through way-points");
  add_system(steer, false)->required();
  add_out(steer);
  add_provenance(steer);
  steer->add_option("--waypoints", o.waypoints, "Way-point set file")->check(CLI::ExistingFile);
  steer->add_option("--angles", o.angles, "Five angles for the universal set")->expected(5);
  steer->add_option("--seed", o.steer.seed, "Seed for the initial guesses");
  steer->add_option("--segment-T", o.steer.segment_T, "Horizon per segment (default 10 pi N / |mu|)");
  steer->add_option("--steps", o.steer.steps_per_segment, "Steps per segment")->check(CLI::PositiveNumber);
  steer->add_option("--max-iters", o.steer.max_iters, "Iterations per segment");
  steer->add_option("--fid-target", o.steer.fid_target, "Target fidelity")->check(CLI::Range(0.0, 1.0));
  steer->add_option("--step-size", o.steer.step_size, "Initial line-search step")->check(CLI::PositiveNumber);
  steer->add_option("--init-amplitude", o.steer.init_amplitude, "Initial guess amplitude");
  steer->add_flag("--trajectory", o.trajectory, "Write trajectory.csv");
  steer->add_option("--jobs", o.jobs, "Accepted for symmetry; segments run sequentially")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return Dispatch(cmd, o);
  } catch (const NotControllableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerdictFail;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerdictFail;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
