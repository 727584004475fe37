#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fwkb/legendre.hpp"

namespace fwkb {

/// Radicand families the closed-form integral table supports for
/// W'_a = integral of sqrt(2(E'_a - U_a)):
///   Affine:  U = k x + m          ->  W' = -(1/(3k)) rho^(3/2)
///   Arcsine: U = v2 x^2 + ...     ->  W' = (u/2) rho^(1/2)
///                                       + (A2/(2 w)) asin(w u / A)
/// with rho the radicand, u = x + B and w^2 = 2 v2 > 0. The table also
/// stores the E / E' partials and inversion formulas in closed form.
enum class RadicandFamily { Affine, Arcsine };

/// Solved a-sector: W_a, W'_a, their gradients and table metadata.
struct SectorSolution {
  int index = 0;
  Rational r, s;          // c_a = r p_a + s D0[q_a], set equal to E_a
  Rational v0, v1, v2;    // V_a(x) = v0 + v1 x + v2 x^2
  RadicandFamily family = RadicandFamily::Affine;
  Expr k, m;              // affine family: U = k x + m (k holds E_a)
  Expr omega, bshift, a2; // arcsine family parameters
  Expr rho;               // radicand 2(E'_a - U_a), canonical in x
  Expr w;                 // W_a(D0[q_a]; E_a)
  Expr wp;                // W'_a(D1[q_a]; E_a, E'_a), closed form
  Expr dw_dq;             // dW_a/dD0[q_a]   (the p_a gradient)
  Expr dwp_dq;            // dW'_a/dD1[q_a] = rho^(1/2)
  Expr dwp_dE;            // table partial, still a function of D1[q_a]
  Expr dwp_dEp;
};

struct MuSolution {
  int index = 0;
  Expr f;   // f_mu(D0[q_mu])
  Expr fp;  // f'_mu(D1[q_mu])
};

/// Separated action S = f(t) + sum_a (W_a + W'_a) + sum_mu (f_mu + f'_mu) + A
/// together with its gradient table (closed forms, no unresolved radicals).
struct HJSolution {
  CanonicalSystem cs;
  Expr f_t;
  std::vector<SectorSolution> sectors;
  std::vector<MuSolution> mus;
  Expr action;
  std::map<AtomId, Expr> gradient;  // d S / d v for v in coords and t

  const SectorSolution& sector(int index) const;
};

/// Closed-form classical motion of one a-sector, in t and the constants
/// E_a, E'_a, eta_a, lambda_a.
struct TrajectorySector {
  int index = 0;
  Expr q0;  // D0[q_a](t)
  Expr q1;  // D1[q_a](t)
  Expr p;   // p_a(t)
  Expr pi;  // pi_a(t)
};

struct Trajectory {
  HJSolution hj;
  std::vector<TrajectorySector> sectors;
  std::vector<int> arbitrary;   // mu-sector coordinates (free parameters)
  std::map<int, Expr> mu_p;     // p_mu = -H^p_mu (functions of the params)
  std::map<int, Expr> mu_pi;

  const TrajectorySector& sector(int index) const;
};

/// Displayable Hamilton-Jacobi equations: momenta replaced by formal
/// gradients dS/d(conjugate coordinate), p0 by dS/dt.
struct HjpdeForm {
  std::string label;
  Expr with_momenta;
  std::string rendered;
};

std::vector<HjpdeForm> build_hjpdes(const CanonicalSystem& cs);

HJSolution solve_separable(const CanonicalSystem& cs);

Trajectory derive_trajectories(const HJSolution& hj);

}  // namespace fwkb
