#pragma once

#include <string>
#include <vector>

#include "fwkb/expr.hpp"

namespace fwkb {

/// Derivative-chain phase space of N coordinates. Each coordinate carries
/// four chain-level atoms D0..D3 (levels of the formal fractional ladder;
/// the chain label itself is never evaluated numerically) plus the two
/// conjugate momenta p_i and pi_i. Level-3 atoms are reporting-only: they
/// may appear in on-shell momentum displays, never in a Hamiltonian,
/// constraint or Hamilton-Jacobi function.
struct PhaseSpace {
  NameTable names;

  int size() const { return names.size(); }

  AtomId chain(int i, int level) const { return atoms::chain(i, level); }
  AtomId p(int i) const { return atoms::p(i); }
  AtomId pi(int i) const { return atoms::pi(i); }
};

struct LagrangianSystem {
  PhaseSpace ps;
  Expr lagrangian;  // over chain levels 0-2 and t only
};

/// Parse and validate a Lagrangian over the named coordinates. Rejects
/// momenta, hbar, integration constants and level-3 atoms in L.
LagrangianSystem build_system(const std::vector<std::string>& coords,
                              const std::string& lagrangian_source);

/// Total time derivative on configuration-space expressions: each level-k
/// chain atom maps to the level-(k+1) atom of the same coordinate, dt/dt=1.
/// The result may contain level-3 atoms. Throws on momenta input.
Expr shift_time_derivative(const Expr& e);

}  // namespace fwkb
