#pragma once

#include <map>
#include <string>
#include <vector>

#include "fwkb/model.hpp"

namespace fwkb {

/// Rank analysis of the acceleration Hessian W_ij = d2L/dD2[q_i]dD2[q_j].
/// For the supported class the entries are rational constants. The a-indices
/// are the lexicographically smallest coordinate set whose principal
/// submatrix is invertible; the remaining mu-indices carry constraints.
struct HessianReport {
  std::vector<std::vector<Rational>> w;
  int rank = 0;
  std::vector<int> a_indices;
  std::vector<int> mu_indices;

  bool regular() const { return mu_indices.empty(); }
};

/// Phase-space image of one Lagrangian system: solved accelerations w_a,
/// primary constraints, and the canonical Hamiltonian H0 (plus the extended
/// H'0 = p0 + H0 driving the Hamilton-Jacobi set).
struct CanonicalSystem {
  LagrangianSystem sys;
  HessianReport hessian;
  std::map<int, Expr> accel;      // a -> w_a
  std::map<int, Expr> onshell_p;  // a -> on-shell p_a report (may hold D3)
  std::map<int, Expr> h_p;        // mu -> H^p_mu, so that p_mu + H^p_mu = 0
  std::map<int, Expr> h_pi;       // mu -> H^pi_mu
  Expr h0;
  Expr hprime0;  // p0 + H0

  Expr constraint_p(int mu) const;   // H'^p_mu = p_mu + H^p_mu
  Expr constraint_pi(int mu) const;  // H'^pi_mu = pi_mu + H^pi_mu
};

HessianReport hessian_and_rank(const LagrangianSystem& sys);

CanonicalSystem legendre_transform(const LagrangianSystem& sys,
                                   const HessianReport& hessian);

/// Poisson bracket over both conjugate pairs (D0[q_i], p_i), (D1[q_i], pi_i).
/// Inputs must be free of level-2/3 chain atoms.
Expr poisson_bracket(const Expr& a, const Expr& b, const PhaseSpace& ps);

struct BracketEntry {
  std::string lhs, rhs;
  Expr value;           // simplified bracket
  Expr on_surface;      // after substituting the constraint relations
  bool zero() const { return value.is_zero(); }
  bool zero_on_surface() const { return on_surface.is_zero(); }
};

struct ConstraintClassification {
  std::vector<BracketEntry> brackets;
  bool first_class = true;  // vacuously true without constraints
  bool integrable = true;   // all brackets vanish on the constraint surface
};

ConstraintClassification classify_and_check_integrability(
    const CanonicalSystem& cs);

}  // namespace fwkb
