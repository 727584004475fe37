#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "fwkb/eval.hpp"
#include "fwkb/hjsolve.hpp"

namespace fwkb {

/// Rate of one evolving phase-space atom as total-differential coefficients:
/// d(var) = c_t dt + sum_mu (c_mu_q0[mu] dD0[q_mu] + c_mu_q1[mu] dD1[q_mu]).
struct EomRate {
  AtomId var;
  Expr c_t;
  std::map<int, Expr> c_mu_q0;
  std::map<int, Expr> c_mu_q1;
};

struct EomSystem {
  CanonicalSystem cs;
  std::vector<EomRate> rates;  // D0/D1 of a-sector, then all p_i, pi_i
};

EomSystem derive_eom(const CanonicalSystem& cs);

/// mu-sector evolution parameters, as expressions in t. Defaults are the
/// constant functions 1: a first-class system's a-sector must not feel the
/// choice, which the verify stage checks explicitly.
struct MuParams {
  std::map<int, Expr> q0;
  std::map<int, Expr> q1;
};

struct RunSpec {
  double t0 = 0.0;
  double t1 = 10.0;
  double h = 1e-3;
  Assignment initial;  // must bind every evolving atom
  MuParams mu;
};

struct NumericRun {
  std::vector<AtomId> columns;  // evolving atoms plus mu coordinates
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // one row per step, per column
  double t0 = 0.0, t1 = 0.0, h = 0.0;
};

/// Classical fixed-step fourth-order Runge-Kutta over [t0, t1].
NumericRun integrate(const EomSystem& eom, const RunSpec& spec);

struct ComparisonReport {
  std::map<AtomId, double> max_deviation;
  double overall = 0.0;
  double tol = 0.0;
  bool pass = false;
  // Constants recovered from the state at t0, per sector index.
  std::map<int, double> E, Ep, eta, lambda;
};

/// Fix the trajectory constants from the run's initial state, then report
/// the per-variable maximum absolute deviation of the run from the closed
/// forms. Throws DegenerateConstantError / UnsupportedError when the
/// constants cannot be recovered.
ComparisonReport compare(const NumericRun& run, const Trajectory& traj,
                         double tol);

/// Solve the sector constants from a state. Shared by compare() and the
/// pipeline (which uses it in reverse to seed runs from given constants).
struct SectorConstants {
  double E = 0.0, Ep = 0.0, eta = 0.0, lambda = 0.0;
};
SectorConstants solve_sector_constants(const HJSolution& hj, int index,
                                       const Assignment& state, double t0);

/// CSV trajectory emission: header "t,<atoms>", one row per step,
/// 17 significant digits.
void write_csv(const NumericRun& run, const NameTable& names,
               std::ostream& os);

}  // namespace fwkb
