#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fwkb/dynamics.hpp"
#include "fwkb/legendre.hpp"
#include "fwkb/report.hpp"
#include "fwkb/sysfile.hpp"
#include "fwkb/wkb.hpp"

namespace fwkb {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitUnsupported = 3;
inline constexpr int kExitVerification = 4;
inline constexpr int kExitQuantization = 5;

struct AnalyzeResult {
  LagrangianSystem sys;
  CanonicalSystem cs;
  ConstraintClassification classification;
};

struct SolveResult {
  AnalyzeResult analyze;
  std::vector<HjpdeForm> hjpdes;
  HJSolution hj;
  Trajectory trajectory;
};

struct VerifyOptions {
  double tol = 1e-6;
  std::optional<std::string> csv_path;
};

struct VerifyResult {
  SolveResult solve;
  RunSpec spec;
  NumericRun run;
  ComparisonReport comparison;
  double h0_drift = 0.0;
  std::map<int, double> constraint_drift_p, constraint_drift_pi;
};

struct QuantizeOptions {
  std::uint64_t seed = 12345;
  int points = 1000;
  std::optional<std::string> perturb_phase;  // debug aid, shared grammar
};

struct QuantizeResult {
  SolveResult solve;
  WaveFunction psi;
  WkbReport wkb;
};

AnalyzeResult analyze_stage(const SystemFile& sf);
SolveResult solve_stage(const SystemFile& sf);
VerifyResult verify_stage(const SystemFile& sf, const VerifyOptions& opts);
QuantizeResult quantize_stage(const SystemFile& sf,
                              const QuantizeOptions& opts);

Report render_analyze(const SystemFile& sf, const AnalyzeResult& r);
Report render_solve(const SystemFile& sf, const SolveResult& r);
Report render_verify(const SystemFile& sf, const VerifyResult& r,
                     const VerifyOptions& opts);
Report render_quantize(const SystemFile& sf, const QuantizeResult& r);

/// Constants for one run: defaults E = E' = 1, eta = lambda = 0,
/// overridden by the file's constants block. Validates against the
/// degenerate configurations of the closed-form families.
Assignment run_constants(const SystemFile& sf, const HJSolution& hj);

/// Full CLI entry (argument vector without the program name).
/// Returns one of the kExit* codes; diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace fwkb
